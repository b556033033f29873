#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace e2g {

/// SQuAD-convention answer normalization: lowercase, drop punctuation,
/// drop the articles a/an/the, collapse whitespace. Idempotent.
std::string normalize_text(std::string_view s);

/// normalize_text followed by a whitespace split.
std::vector<std::string> normalize_tokens(std::string_view s);

/// 1 iff the normalized prediction equals some normalized gold. Answers that
/// both parse fully as numbers compare by value, so "456.0" matches "456".
int exact_match(std::string_view pred, const std::vector<std::string>& golds);

/// Max over golds of the harmonic mean of token precision/recall on the
/// normalized token multisets. Both sides empty -> 1; exactly one empty -> 0.
double token_f1(std::string_view pred, const std::vector<std::string>& golds);

/// Label equality after normalization. An absent (unmappable) prediction
/// scores 0; the caller records the flag.
int accuracy(const std::optional<std::string>& pred_label, std::string_view gold_label);

struct ScoreRow {
  std::string id;
  int em = 0;
  double f1 = 0.0;
  std::optional<int> acc;   // only for label/option tasks
  bool unmappable = false;  // prediction could not be mapped to a label
};

struct ScoreReport {
  std::vector<ScoreRow> per_instance;
  std::size_t count = 0;
  std::size_t acc_count = 0;
  std::size_t unmappable_count = 0;
  // Percent means; absent when no row carries the metric.
  std::optional<double> em_pct;
  std::optional<double> f1_pct;
  std::optional<double> acc_pct;
  double cost_total = 0.0;
  std::int64_t latency_total_ms = 0;
};

/// Means of the per-row scores times 100. Order-independent; an empty input
/// yields zero counts with the means absent rather than NaN.
ScoreReport aggregate(std::vector<ScoreRow> rows, double cost_total = 0.0,
                      std::int64_t latency_total_ms = 0);

}  // namespace e2g
