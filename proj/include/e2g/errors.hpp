#pragma once

#include <stdexcept>
#include <string>

namespace e2g {

/// Base class for every error raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data (dataset records, store files, completions).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration; reported before any backend call.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Credential rejected by the endpoint. Never retried.
class AuthError : public Error {
 public:
  using Error::Error;
};

/// Rate limit still in force after the configured retries.
class RateLimitError : public Error {
 public:
  using Error::Error;
};

/// Transport failure that survived the retry budget.
class BackendError : public Error {
 public:
  using Error::Error;
};

/// Replay backend asked for a request that was never recorded.
class ReplayMissError : public Error {
 public:
  ReplayMissError(const std::string& message, std::string key)
      : Error(message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Write-once violation: same cache key, different payload.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

/// Stored file fails its checksum.
class ChecksumError : public Error {
 public:
  using Error::Error;
};

/// A label-task completion that maps to no known label.
class UnmappableAnswerError : public Error {
 public:
  using Error::Error;
};

}  // namespace e2g
