#include "e2g/metrics.hpp"

#include <cctype>
#include <cstdlib>
#include <unordered_map>

#include "e2g/strings.hpp"

namespace e2g {

namespace {

bool is_article(std::string_view tok) {
  return tok == "a" || tok == "an" || tok == "the";
}

// Full-string numeric parse; rejects partial consumption like "1,000".
std::optional<double> parse_number(std::string_view s) {
  std::string t{trim(s)};
  if (t.empty()) return std::nullopt;
  const char* begin = t.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end != begin + t.size()) return std::nullopt;
  return v;
}

double pair_f1(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  if (pred.empty() && gold.empty()) return 1.0;
  if (pred.empty() || gold.empty()) return 0.0;
  std::unordered_map<std::string, int> counts;
  for (const auto& t : gold) ++counts[t];
  std::size_t same = 0;
  for (const auto& t : pred) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++same;
    }
  }
  if (same == 0) return 0.0;
  double precision = static_cast<double>(same) / static_cast<double>(pred.size());
  double recall = static_cast<double>(same) / static_cast<double>(gold.size());
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

std::string normalize_text(std::string_view s) {
  // Lowercase and drop punctuation in one pass (punctuation is removed, not
  // replaced by a space, matching the SQuAD reference script).
  std::string lowered;
  lowered.reserve(s.size());
  for (char c : s) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::ispunct(u)) continue;
    lowered.push_back(static_cast<char>(std::tolower(u)));
  }
  std::string out;
  for (const auto& tok : split_whitespace(lowered)) {
    if (is_article(tok)) continue;
    if (!out.empty()) out.push_back(' ');
    out += tok;
  }
  return out;
}

std::vector<std::string> normalize_tokens(std::string_view s) {
  return split_whitespace(normalize_text(s));
}

int exact_match(std::string_view pred, const std::vector<std::string>& golds) {
  std::string np = normalize_text(pred);
  std::optional<double> pn = parse_number(pred);
  for (const auto& gold : golds) {
    if (np == normalize_text(gold)) return 1;
    if (pn) {
      std::optional<double> gn = parse_number(gold);
      if (gn && *pn == *gn) return 1;
    }
  }
  return 0;
}

double token_f1(std::string_view pred, const std::vector<std::string>& golds) {
  std::vector<std::string> pt = normalize_tokens(pred);
  double best = 0.0;
  for (const auto& gold : golds) {
    best = std::max(best, pair_f1(pt, normalize_tokens(gold)));
  }
  return best;
}

int accuracy(const std::optional<std::string>& pred_label, std::string_view gold_label) {
  if (!pred_label) return 0;
  return normalize_text(*pred_label) == normalize_text(gold_label) ? 1 : 0;
}

ScoreReport aggregate(std::vector<ScoreRow> rows, double cost_total,
                      std::int64_t latency_total_ms) {
  ScoreReport report;
  report.count = rows.size();
  report.cost_total = cost_total;
  report.latency_total_ms = latency_total_ms;
  double em_sum = 0.0;
  double f1_sum = 0.0;
  double acc_sum = 0.0;
  for (const auto& row : rows) {
    em_sum += row.em;
    f1_sum += row.f1;
    if (row.acc) {
      acc_sum += *row.acc;
      ++report.acc_count;
    }
    if (row.unmappable) ++report.unmappable_count;
  }
  if (report.count > 0) {
    report.em_pct = 100.0 * em_sum / static_cast<double>(report.count);
    report.f1_pct = 100.0 * f1_sum / static_cast<double>(report.count);
  }
  if (report.acc_count > 0) {
    report.acc_pct = 100.0 * acc_sum / static_cast<double>(report.acc_count);
  }
  report.per_instance = std::move(rows);
  return report;
}

}  // namespace e2g
