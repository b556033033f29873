#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "e2g/backend.hpp"
#include "e2g/errors.hpp"
#include "e2g/prompt.hpp"
#include "e2g/task.hpp"

namespace e2g::test {

/// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "e2g-test-XXXXXX").string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    if (!mkdtemp(buf.data())) throw Error("mkdtemp failed");
    path_ = buf.data();
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out.flush()) throw Error("write_file failed: " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("read_file failed: " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

/// Deterministic in-process backend driven by a completion function.
class ScriptedBackend : public CompletionBackend {
 public:
  using Script = std::function<std::string(const CompletionRequest&)>;

  explicit ScriptedBackend(Script script) : script_(std::move(script)) {}

  CompletionResponse complete(const CompletionRequest& request) override {
    calls_.fetch_add(1);
    CompletionResponse response;
    response.text = script_(request);
    response.prompt_tokens = static_cast<std::int64_t>(estimate_tokens(request.prompt));
    response.output_tokens = static_cast<std::int64_t>(estimate_tokens(response.text));
    response.latency_ms = 10;
    response.source = ResponseSource::live;
    return response;
  }

  std::string describe() const override { return "scripted"; }

  int calls() const { return calls_.load(); }

 private:
  Script script_;
  std::atomic<int> calls_{0};
};

inline Instance make_instance(std::string id, TaskName task, std::string query,
                              std::vector<std::string> docs, std::vector<std::string> golds) {
  Instance inst;
  inst.id = std::move(id);
  inst.task = task_kind(task);
  inst.query = std::move(query);
  inst.context_docs = std::move(docs);
  inst.gold_answers = std::move(golds);
  return inst;
}

}  // namespace e2g::test
