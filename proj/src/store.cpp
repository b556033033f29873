#include "e2g/store.hpp"

#include <openssl/evp.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "e2g/errors.hpp"

namespace e2g {

namespace {

constexpr int kSchemaVersion = 1;

std::string to_hex(const unsigned char* data, std::size_t len) {
  static const char digits[] = "0123456789abcdef";
  std::string out(len * 2, '0');
  for (std::size_t i = 0; i < len; ++i) {
    out[2 * i] = digits[data[i] >> 4];
    out[2 * i + 1] = digits[data[i] & 0xf];
  }
  return out;
}

bool valid_digest(std::string_view digest) {
  if (digest.size() != 64) return false;
  for (char c : digest) {
    bool hex = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
    if (!hex) return false;
  }
  return true;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

nlohmann::json make_container(const CacheKey& key, const nlohmann::json& payload) {
  return nlohmann::json{{"schema_version", kSchemaVersion},
                        {"key", key.digest},
                        {"checksum", sha256_hex(payload.dump())},
                        {"payload", payload}};
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw Error("EVP_MD_CTX_new failed");
  bool ok = EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1 &&
            EVP_DigestUpdate(ctx, data.data(), data.size()) == 1 &&
            EVP_DigestFinal_ex(ctx, digest, &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw Error("sha256 digest failed");
  return to_hex(digest, len);
}

std::string sha256_file(const std::filesystem::path& path) {
  return sha256_hex(read_file(path));
}

TranscriptStore::TranscriptStore(std::filesystem::path root) : root_(std::move(root)) {
  std::filesystem::create_directories(root_);
}

std::filesystem::path TranscriptStore::path_for(const CacheKey& key) const {
  if (!valid_digest(key.digest)) throw Error("malformed cache key '" + key.digest + "'");
  return root_ / key.digest.substr(0, 2) / (key.digest + ".json");
}

void TranscriptStore::put(const CacheKey& key, const nlohmann::json& payload) const {
  const std::filesystem::path target = path_for(key);
  std::filesystem::create_directories(target.parent_path());

  auto matches_existing = [&]() {
    auto existing = get(key);
    return existing && existing->dump() == payload.dump();
  };

  if (std::filesystem::exists(target)) {
    if (matches_existing()) return;
    throw IntegrityError("store entry '" + key.digest + "' already holds a different payload");
  }

  const std::string serialized = make_container(key, payload).dump(2) + "\n";

  static std::atomic<unsigned long> counter{0};
  std::filesystem::path tmp =
      root_ / ("tmp-" + std::to_string(::getpid()) + "-" +
               std::to_string(counter.fetch_add(1)) + "-" + key.digest.substr(0, 8));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write temp file '" + tmp.string() + "'");
    out << serialized;
    out.flush();
    if (!out) throw Error("short write to '" + tmp.string() + "'");
  }

  // link() is atomic, which makes the store write-once under concurrency
  int rc = ::link(tmp.c_str(), target.c_str());
  int saved = errno;
  std::error_code ignored;
  std::filesystem::remove(tmp, ignored);
  if (rc == 0) return;
  if (saved == EEXIST) {
    if (matches_existing()) return;
    throw IntegrityError("store entry '" + key.digest + "' already holds a different payload");
  }
  throw Error("link('" + target.string() + "') failed: " + std::strerror(saved));
}

std::optional<nlohmann::json> TranscriptStore::get(const CacheKey& key) const {
  const std::filesystem::path target = path_for(key);
  if (!std::filesystem::exists(target)) return std::nullopt;

  nlohmann::json container;
  try {
    container = nlohmann::json::parse(read_file(target));
  } catch (const nlohmann::json::exception&) {
    throw ChecksumError("corrupt store entry '" + target.string() + "': unparseable");
  }
  if (!container.is_object() || !container.contains("payload") ||
      !container.contains("checksum") || container.value("key", "") != key.digest) {
    throw ChecksumError("corrupt store entry '" + target.string() + "': bad container");
  }
  const nlohmann::json& payload = container["payload"];
  if (sha256_hex(payload.dump()) != container["checksum"].get<std::string>()) {
    throw ChecksumError("corrupt store entry '" + target.string() + "': checksum mismatch");
  }
  return payload;
}

bool TranscriptStore::contains(const CacheKey& key) const {
  return std::filesystem::exists(path_for(key));
}

std::vector<std::string> TranscriptStore::keys() const {
  std::vector<std::string> out;
  if (!std::filesystem::exists(root_)) return out;
  for (const auto& dir : std::filesystem::directory_iterator(root_)) {
    if (!dir.is_directory()) continue;
    for (const auto& file : std::filesystem::directory_iterator(dir.path())) {
      if (file.path().extension() != ".json") continue;
      std::string digest = file.path().stem().string();
      if (valid_digest(digest)) out.push_back(std::move(digest));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void export_store(const TranscriptStore& store, const std::filesystem::path& archive) {
  std::ofstream out(archive, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write archive '" + archive.string() + "'");
  for (const auto& digest : store.keys()) {
    CacheKey key{digest};
    auto payload = store.get(key);
    if (!payload) continue;
    nlohmann::json line{{"key", digest}, {"payload", *payload}};
    out << line.dump() << "\n";
  }
  if (!out.flush()) throw Error("short write to '" + archive.string() + "'");
}

std::size_t import_store(const TranscriptStore& store, const std::filesystem::path& archive) {
  std::ifstream in(archive, std::ios::binary);
  if (!in) throw ConfigError("cannot open archive '" + archive.string() + "'");
  std::size_t added = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json entry;
    try {
      entry = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("archive line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!entry.is_object() || !entry.contains("key") || !entry.contains("payload"))
      throw ParseError("archive line " + std::to_string(line_no) + ": expected key and payload");
    CacheKey key{entry["key"].get<std::string>()};
    if (!store.contains(key)) ++added;
    store.put(key, entry["payload"]);
  }
  return added;
}

}  // namespace e2g
