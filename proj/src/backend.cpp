#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "e2g/backend.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <semaphore>
#include <thread>

#include "e2g/errors.hpp"
#include "e2g/prompt.hpp"

namespace e2g {

double estimate_cost(const CompletionResponse& response, const CostModel& model) {
  return static_cast<double>(response.prompt_tokens) / 1000.0 * model.input_rate +
         static_cast<double>(response.output_tokens) / 1000.0 * model.output_rate;
}

CacheKey cache_key_for(const CompletionRequest& request) {
  char temp[32];
  std::snprintf(temp, sizeof(temp), "%.6g", request.temperature);
  std::string canonical = request.model_id;
  canonical += '\n';
  canonical += std::to_string(request.max_output_tokens);
  canonical += '\n';
  canonical += temp;
  canonical += '\n';
  canonical += request.prompt;
  return CacheKey{sha256_hex(canonical)};
}

nlohmann::json transcript_payload(const CompletionRequest& request,
                                  const CompletionResponse& response) {
  return nlohmann::json{
      {"request",
       {{"model_id", request.model_id},
        {"prompt", request.prompt},
        {"max_output_tokens", request.max_output_tokens},
        {"temperature", request.temperature}}},
      {"response",
       {{"text", response.text},
        {"prompt_tokens", response.prompt_tokens},
        {"output_tokens", response.output_tokens},
        {"latency_ms", response.latency_ms}}}};
}

HttpBackendConfig HttpBackendConfig::from_env() {
  HttpBackendConfig config;
  const char* base = std::getenv("E2G_API_BASE");
  if (!base || !*base) throw ConfigError("E2G_API_BASE is not set; required for live runs");
  config.base_url = base;
  if (const char* key = std::getenv("E2G_API_KEY")) config.api_key = key;
  return config;
}

struct HttpBackend::Impl {
  HttpBackendConfig config;
  std::counting_semaphore<1024> in_flight;

  explicit Impl(HttpBackendConfig cfg) : config(std::move(cfg)), in_flight(config.max_in_flight) {}
};

HttpBackend::HttpBackend(HttpBackendConfig config) {
  if (config.base_url.empty()) throw ConfigError("http backend needs a base url");
  if (config.max_in_flight < 1 || config.max_in_flight > 1024)
    throw ConfigError("max_in_flight out of range [1, 1024]");
  if (config.max_retries < 0) throw ConfigError("max_retries must be >= 0");
  impl_ = std::make_unique<Impl>(std::move(config));
}

HttpBackend::~HttpBackend() = default;

std::string HttpBackend::describe() const { return "http(" + impl_->config.base_url + ")"; }

namespace {

struct SemaphoreGuard {
  std::counting_semaphore<1024>& sem;
  explicit SemaphoreGuard(std::counting_semaphore<1024>& s) : sem(s) { sem.acquire(); }
  ~SemaphoreGuard() { sem.release(); }
};

CompletionResponse parse_completion(const std::string& body, const CompletionRequest& request,
                                    std::int64_t latency_ms) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("unparseable completion body: ") + e.what());
  }
  if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty())
    throw BackendError("completion body has no choices");
  const auto& choice = j["choices"][0];
  CompletionResponse response;
  if (choice.contains("text"))
    response.text = choice["text"].get<std::string>();
  else if (choice.contains("message") && choice["message"].contains("content"))
    response.text = choice["message"]["content"].get<std::string>();
  if (response.text.empty()) throw BackendError("completion body has empty text");

  if (j.contains("usage") && j["usage"].is_object()) {
    response.prompt_tokens = j["usage"].value("prompt_tokens", std::int64_t{0});
    response.output_tokens = j["usage"].value("completion_tokens", std::int64_t{0});
  }
  if (response.prompt_tokens <= 0)
    response.prompt_tokens = static_cast<std::int64_t>(estimate_tokens(request.prompt));
  if (response.output_tokens <= 0)
    response.output_tokens = static_cast<std::int64_t>(estimate_tokens(response.text));
  response.latency_ms = latency_ms;
  response.source = ResponseSource::live;
  return response;
}

}  // namespace

CompletionResponse HttpBackend::complete(const CompletionRequest& request) {
  const HttpBackendConfig& cfg = impl_->config;
  SemaphoreGuard guard(impl_->in_flight);

  nlohmann::json body{{"model", request.model_id},
                      {"prompt", request.prompt},
                      {"max_tokens", request.max_output_tokens},
                      {"temperature", request.temperature}};
  httplib::Headers headers;
  if (!cfg.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg.api_key);

  std::string last_error = "no attempt made";
  bool rate_limited = false;

  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    if (attempt > 0) {
      std::int64_t backoff = static_cast<std::int64_t>(cfg.initial_backoff_ms) << (attempt - 1);
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
    }

    httplib::Client client(cfg.base_url);
    client.set_connection_timeout(cfg.timeout_sec, 0);
    client.set_read_timeout(cfg.timeout_sec, 0);
    client.set_write_timeout(cfg.timeout_sec, 0);

    auto started = std::chrono::steady_clock::now();
    httplib::Result result =
        client.Post(cfg.completions_path, headers, body.dump(), "application/json");
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - started)
                       .count();

    if (!result) {
      last_error = "transport error: " + httplib::to_string(result.error());
      rate_limited = false;
      continue;
    }
    int status = result->status;
    if (status == 401 || status == 403)
      throw AuthError("authentication rejected (" + std::to_string(status) + ")");
    if (status == 429) {
      last_error = "rate limited (429)";
      rate_limited = true;
      continue;
    }
    if (status >= 500) {
      last_error = "server error (" + std::to_string(status) + ")";
      rate_limited = false;
      continue;
    }
    if (status != 200)
      throw BackendError("completion failed with status " + std::to_string(status) + ": " +
                         result->body);
    return parse_completion(result->body, request, elapsed);
  }

  if (rate_limited) throw RateLimitError("retries exhausted: " + last_error);
  throw BackendError("retries exhausted: " + last_error);
}

ReplayBackend::ReplayBackend(TranscriptStore store) : store_(std::move(store)) {}

ReplayBackend::ReplayBackend(TranscriptStore store, std::shared_ptr<CompletionBackend> fallback)
    : store_(std::move(store)), fallback_(std::move(fallback)) {}

std::string ReplayBackend::describe() const {
  if (fallback_) return "replay+record(" + fallback_->describe() + ")";
  return "replay";
}

CompletionResponse ReplayBackend::complete(const CompletionRequest& request) {
  const CacheKey key = cache_key_for(request);
  if (auto payload = store_.get(key)) {
    const auto& stored = (*payload)["request"];
    if (stored.value("prompt", "") != request.prompt ||
        stored.value("model_id", "") != request.model_id)
      throw IntegrityError("transcript '" + key.digest + "' does not match the request");
    const auto& resp = (*payload)["response"];
    CompletionResponse response;
    response.text = resp.value("text", "");
    response.prompt_tokens = resp.value("prompt_tokens", std::int64_t{0});
    response.output_tokens = resp.value("output_tokens", std::int64_t{0});
    response.latency_ms = resp.value("latency_ms", std::int64_t{0});
    response.source = ResponseSource::replay;
    return response;
  }
  if (!fallback_)
    throw ReplayMissError("no recorded transcript for request '" + request.request_tag +
                              "' (key " + key.digest + ")",
                          key.digest);
  CompletionResponse fresh = fallback_->complete(request);
  store_.put(key, transcript_payload(request, fresh));
  return fresh;
}

}  // namespace e2g
