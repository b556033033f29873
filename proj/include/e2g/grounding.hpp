#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "e2g/extract.hpp"
#include "e2g/task.hpp"

namespace e2g {

/// Error taxonomy for incorrectly answered instances, in precedence order.
enum class ErrorKind {
  yes_no_flip,             // reasoning stance contradicts the emitted yes/no
  answer_span_in_reasoning,  // a gold span appears in the rationale anyway
  ungrounded_hypothesis,   // rationale mostly unsupported by the context
  other,
};

std::string_view to_string(ErrorKind kind);
ErrorKind error_kind_from_string(std::string_view s);

enum class QuestionType { wh, yes_no, other };

std::string_view to_string(QuestionType type);
QuestionType question_type_from_string(std::string_view s);

struct MatchedSpan {
  std::size_t sentence_index = 0;
  std::size_t begin = 0;  // char range in the normalized context
  std::size_t end = 0;
  double score = 0.0;

  friend bool operator==(const MatchedSpan&, const MatchedSpan&) = default;
};

struct GroundingReport {
  double grounded_fraction = 0.0;
  std::size_t sentence_count = 0;
  std::size_t matched_count = 0;
  std::vector<MatchedSpan> matched_spans;

  friend bool operator==(const GroundingReport&, const GroundingReport&) = default;
};

/// Sentence split on terminal punctuation ('.', '!', '?') followed by
/// whitespace or end of text; pieces are trimmed and empties dropped.
std::vector<std::string> split_sentences(std::string_view text);

/// Fraction of evidence sentences attested in the context. A sentence
/// matches exactly when its normalized form is a substring of the
/// normalized context, or fuzzily when some same-length token window
/// reaches an LCS ratio of at least fuzz_threshold.
GroundingReport grounding_score(std::string_view evidence, std::string_view context,
                                double fuzz_threshold = 0.8);

/// Batch form, parallelized across items; bit-identical to mapping
/// grounding_score.
std::vector<GroundingReport> grounding_score_batch(const std::vector<std::string>& evidences,
                                                   const std::vector<std::string>& contexts,
                                                   double fuzz_threshold = 0.8);

/// Serial reference for the batch kernel, kept for tests and benchmarks.
std::vector<GroundingReport> grounding_score_batch_serial(
    const std::vector<std::string>& evidences, const std::vector<std::string>& contexts,
    double fuzz_threshold = 0.8);

/// wh when the first query token is a wh-word, yes_no when the task or the
/// gold answers call for a yes/no verdict.
QuestionType question_type(const Instance& instance);

/// Buckets an incorrectly answered instance. Precedence: yes_no_flip, then
/// answer_span_in_reasoning, then ungrounded_hypothesis (grounded fraction
/// below grounded_min), then other. Throws when the instance scored correct.
ErrorKind classify_error(const Instance& instance, std::string_view reasoning,
                         const FinalAnswer& pred, double fuzz_threshold = 0.8,
                         double grounded_min = 0.5);

struct ClassifiedError {
  ErrorKind kind = ErrorKind::other;
  QuestionType qtype = QuestionType::other;
};

struct TaxonomyRow {
  ErrorKind kind = ErrorKind::other;
  std::size_t count = 0;
  double pct = 0.0;  // of all classified errors
  std::size_t wh_count = 0;
  std::size_t yes_no_count = 0;
  std::size_t other_count = 0;
};

struct TaxonomySummary {
  std::vector<TaxonomyRow> rows;  // one row per ErrorKind, fixed order
  std::size_t total = 0;
};

TaxonomySummary taxonomy_summary(const std::vector<ClassifiedError>& errors);

}  // namespace e2g
