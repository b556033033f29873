#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace e2g {

/// Hex SHA-256 digest (64 lowercase chars).
std::string sha256_hex(std::string_view data);

/// Digest of a file's bytes; throws ConfigError when unreadable.
std::string sha256_file(const std::filesystem::path& path);

struct CacheKey {
  std::string digest;  // 64 hex chars

  friend bool operator==(const CacheKey&, const CacheKey&) = default;
};

/// Content-addressed, write-once JSON store. Entries fan out under two-hex
/// subdirectories and carry a checksum so corruption is detected on read.
class TranscriptStore {
 public:
  explicit TranscriptStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  /// Durable put. Re-putting an identical payload is a no-op; a different
  /// payload under the same key raises IntegrityError.
  void put(const CacheKey& key, const nlohmann::json& payload) const;

  /// nullopt on miss; ChecksumError on a corrupt or truncated entry.
  std::optional<nlohmann::json> get(const CacheKey& key) const;

  bool contains(const CacheKey& key) const;

  /// All stored digests, sorted.
  std::vector<std::string> keys() const;

  std::filesystem::path path_for(const CacheKey& key) const;

 private:
  std::filesystem::path root_;
};

/// Writes every entry as one {"key", "payload"} JSON line, sorted by key.
void export_store(const TranscriptStore& store, const std::filesystem::path& archive);

/// Imports an archive produced by export_store; returns the number of new
/// entries. Conflicting payloads for an existing key raise IntegrityError.
std::size_t import_store(const TranscriptStore& store, const std::filesystem::path& archive);

}  // namespace e2g
