#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "e2g/task.hpp"

namespace e2g {

enum class ParseMode { labeled, heuristic, fallback_whole };

std::string_view to_string(ParseMode mode);
ParseMode parse_mode_from_string(std::string_view s);

/// Parsed first-step completion.
struct EStepResult {
  std::string answer;    // temporary answer; may be discarded by routing
  std::string evidence;  // extracted rationale, empty only in fallback mode
  std::string raw;       // full completion text
  ParseMode mode = ParseMode::fallback_whole;

  friend bool operator==(const EStepResult&, const EStepResult&) = default;
};

/// Splits a completion into (answer, evidence). Labeled mode when both
/// "Answer:" and "Evidence and explanation:" sections are present; otherwise
/// first line vs. remainder; otherwise the whole text becomes the answer
/// with empty evidence. Total on nonempty input.
EStepResult parse_e_step(const std::string& raw);

/// Label synonym sets, kept as data. Format: one "LABEL: phrase, phrase"
/// line per label; '#' starts a comment. Earliest phrase occurrence in the
/// normalized text wins; ties go to the longer phrase.
class SynonymTable {
 public:
  static const SynonymTable& defaults();
  static SynonymTable parse(std::string_view text);
  static SynonymTable load(const std::filesystem::path& path);

  std::optional<std::string> match(std::string_view text) const;

 private:
  struct Entry {
    std::string label;
    std::vector<std::string> phrases;  // normalized
  };
  std::vector<Entry> entries_;
};

struct FinalAnswer {
  std::string text;                  // cleaned answer surface
  std::optional<std::string> label;  // class label, yes/no, or option key

  friend bool operator==(const FinalAnswer&, const FinalAnswer&) = default;
};

/// Normalizes a completion into the task's answer space. Label tasks map
/// free text case-insensitively through keyword and option matching; span
/// tasks strip "Answer:" framing. Throws UnmappableAnswerError when a label
/// task yields no recognizable label.
FinalAnswer extract_final_answer(const std::string& raw, const TaskKind& task,
                                 const std::optional<std::vector<std::string>>& options,
                                 const SynonymTable& synonyms = SynonymTable::defaults());

/// First "yes"/"no" token in normalized order; first occurrence wins when
/// both appear.
std::optional<std::string> first_yes_no(std::string_view text);

/// True iff the normalized span occurs inside the normalized haystack.
bool contains_span(std::string_view haystack, std::string_view span);

/// Canonical label for an instance's first gold answer (class label, yes/no,
/// or option key). Absent for plain span and free-text tasks.
std::optional<std::string> gold_label(const Instance& instance);

/// Task-aware correctness: label equality for label tasks, exact match for
/// the rest.
bool scored_correct(const Instance& instance, const FinalAnswer& pred);

}  // namespace e2g
