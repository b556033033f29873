#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "e2g/strings.hpp"

namespace e2g {

enum class TaskName {
  logical_mrc,
  arithmetic_mrc,
  multihop_qa,
  open_qa,
  fact_verification,
  dialogue,
  long_form_qa,
};

enum class AnswerForm {
  short_span,
  option_choice,
  yes_no,
  class_label,
  free_text,
};

std::string_view to_string(TaskName name);
std::string_view to_string(AnswerForm form);
TaskName task_name_from_string(std::string_view s);
AnswerForm answer_form_from_string(std::string_view s);

struct TaskKind {
  TaskName name = TaskName::multihop_qa;
  AnswerForm answer_form = AnswerForm::short_span;
  std::vector<std::string> metric_set;    // subset of {"em","f1","acc"}
  std::vector<std::string> class_labels;  // nonempty only for class-label tasks

  friend bool operator==(const TaskKind&, const TaskKind&) = default;
};

/// The registered kind for a task name. These pairings are the only
/// task/answer-form combinations the loader accepts.
const TaskKind& task_kind(TaskName name);
const TaskKind& task_kind_from_string(std::string_view name);

struct Instance {
  std::string id;
  TaskKind task;
  std::string query;  // question, claim, or flattened dialogue history
  std::vector<std::string> context_docs;
  std::optional<std::vector<std::string>> options;  // ordered, option-choice only
  std::vector<std::string> gold_answers;            // nonempty
  std::optional<double> retrieval_recall;           // precomputed, report-side only

  friend bool operator==(const Instance&, const Instance&) = default;
};

struct Dataset {
  std::string name;
  std::vector<Instance> instances;
  std::string source_path;
  std::string split;
};

/// One row of the benchmark table: dataset key, task kind, average context
/// length in words, and evaluated split size.
struct BenchmarkDescriptor {
  std::string key;
  TaskName task;
  int avg_context_words;
  std::size_t eval_size;
};

/// The eight supported benchmarks (logiqa, drop, hotpotqa, nq, tqa, wow,
/// eli5, fever).
const std::vector<BenchmarkDescriptor>& benchmark_table();
const BenchmarkDescriptor* find_benchmark(std::string_view key);

/// Loads a JSONL dataset (one instance per line). Required fields: id, query,
/// context (array of strings), gold (array of strings). Optional: options
/// (array), label (class tasks), recall (number). Dialogue queries may be an
/// array of turns, flattened with "Turn i:" markers. Errors name the line and
/// the offending field. Record order is preserved.
Dataset load_dataset(const std::filesystem::path& path, const TaskKind& schema,
                     std::string split = "dev");

/// Writes instances back out in the loader's field mapping.
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

inline constexpr std::string_view kDocSeparator = "\n\n";

/// "[Document i]\n" heading placed above each context document.
std::string document_heading(std::size_t index_one_based);

/// Concatenates the first min(top_k, size) documents, each under its heading,
/// blocks joined by kDocSeparator. Pure and deterministic.
std::string assemble_context(const Instance& instance, std::size_t top_k);

/// Whitespace-delimited token count; the routing threshold input.
inline std::size_t context_word_count(std::string_view text) { return word_count(text); }

}  // namespace e2g
