#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "e2g/store.hpp"

namespace e2g {

struct CompletionRequest {
  std::string model_id;
  std::string prompt;
  int max_output_tokens = 256;
  double temperature = 0.0;
  std::string request_tag;  // instance id + step; not part of the cache key

  friend bool operator==(const CompletionRequest&, const CompletionRequest&) = default;
};

enum class ResponseSource { live, replay };

struct CompletionResponse {
  std::string text;
  std::int64_t prompt_tokens = 0;
  std::int64_t output_tokens = 0;
  std::int64_t latency_ms = 0;
  ResponseSource source = ResponseSource::live;

  friend bool operator==(const CompletionResponse&, const CompletionResponse&) = default;
};

/// Currency per 1K tokens.
struct CostModel {
  double input_rate = 0.0;
  double output_rate = 0.0;
};

double estimate_cost(const CompletionResponse& response, const CostModel& model);

/// Key over the semantic request fields only, so the same prompt replays
/// regardless of which instance or run issued it.
CacheKey cache_key_for(const CompletionRequest& request);

class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  virtual CompletionResponse complete(const CompletionRequest& request) = 0;
  virtual std::string describe() const = 0;
};

struct HttpBackendConfig {
  std::string base_url;  // scheme://host[:port]
  std::string api_key;
  std::string completions_path = "/v1/completions";
  int max_retries = 3;
  int initial_backoff_ms = 250;
  int max_in_flight = 4;
  int timeout_sec = 120;

  /// Reads E2G_API_BASE and E2G_API_KEY; throws ConfigError when the base
  /// URL is missing.
  static HttpBackendConfig from_env();
};

/// OpenAI-style completions client. Retries transport errors, 429 and 5xx
/// with exponential backoff; 401/403 fail fast; concurrency is bounded by
/// max_in_flight.
class HttpBackend : public CompletionBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config);
  ~HttpBackend() override;

  CompletionResponse complete(const CompletionRequest& request) override;
  std::string describe() const override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Serves recorded transcripts. Without a fallback a miss raises
/// ReplayMissError; with one, fresh responses are fetched and recorded
/// write-once, so reruns replay byte-identically.
class ReplayBackend : public CompletionBackend {
 public:
  explicit ReplayBackend(TranscriptStore store);
  ReplayBackend(TranscriptStore store, std::shared_ptr<CompletionBackend> fallback);

  CompletionResponse complete(const CompletionRequest& request) override;
  std::string describe() const override;

  const TranscriptStore& store() const { return store_; }

 private:
  TranscriptStore store_;
  std::shared_ptr<CompletionBackend> fallback_;
};

nlohmann::json transcript_payload(const CompletionRequest& request,
                                  const CompletionResponse& response);

}  // namespace e2g
