#include "e2g/grounding.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <exception>
#include <unordered_set>

#include "e2g/errors.hpp"
#include "e2g/metrics.hpp"
#include "e2g/strings.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace e2g {

namespace {

constexpr std::array<ErrorKind, 4> kErrorKinds = {
    ErrorKind::yes_no_flip,
    ErrorKind::answer_span_in_reasoning,
    ErrorKind::ungrounded_hypothesis,
    ErrorKind::other,
};

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

struct Token {
  std::size_t begin = 0;
  std::size_t end = 0;
};

// normalize_text joins tokens with single spaces, so offsets are trivial
std::vector<Token> token_offsets(const std::string& norm) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < norm.size()) {
    std::size_t j = norm.find(' ', i);
    if (j == std::string::npos) j = norm.size();
    if (j > i) out.push_back({i, j});
    i = j + 1;
  }
  return out;
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<Token>& ctx,
                       std::size_t w_begin, std::size_t w_len, const std::string& norm_ctx) {
  std::vector<std::size_t> prev(w_len + 1, 0), cur(w_len + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= w_len; ++j) {
      const Token& t = ctx[w_begin + j - 1];
      std::string_view ctx_tok(norm_ctx.data() + t.begin, t.end - t.begin);
      if (a[i - 1] == ctx_tok)
        cur[j] = prev[j - 1] + 1;
      else
        cur[j] = std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[w_len];
}

const std::unordered_set<std::string>& wh_words() {
  static const std::unordered_set<std::string> words = {
      "who", "what", "when", "where", "why", "which", "whose", "whom", "how"};
  return words;
}

bool is_yes_no_word(const std::string& s) {
  std::string n = normalize_text(s);
  return n == "yes" || n == "no";
}

}  // namespace

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::yes_no_flip: return "yes-no-flip";
    case ErrorKind::answer_span_in_reasoning: return "answer-span-in-reasoning";
    case ErrorKind::ungrounded_hypothesis: return "ungrounded-hypothesis";
    case ErrorKind::other: return "other";
  }
  throw Error("bad ErrorKind value");
}

ErrorKind error_kind_from_string(std::string_view s) {
  for (ErrorKind kind : kErrorKinds) {
    if (to_string(kind) == s) return kind;
  }
  throw ParseError("unknown error kind '" + std::string(s) + "'");
}

std::string_view to_string(QuestionType type) {
  switch (type) {
    case QuestionType::wh: return "wh";
    case QuestionType::yes_no: return "yes-no";
    case QuestionType::other: return "other";
  }
  throw Error("bad QuestionType value");
}

QuestionType question_type_from_string(std::string_view s) {
  if (s == "wh") return QuestionType::wh;
  if (s == "yes-no") return QuestionType::yes_no;
  if (s == "other") return QuestionType::other;
  throw ParseError("unknown question type '" + std::string(s) + "'");
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!is_terminal(text[i])) continue;
    std::size_t j = i;
    while (j + 1 < text.size() && is_terminal(text[j + 1])) ++j;
    if (j + 1 < text.size() && !std::isspace(static_cast<unsigned char>(text[j + 1]))) {
      i = j;
      continue;  // abbreviation-ish: "3.5", "U.S.A"
    }
    std::string_view piece = trim(text.substr(start, j + 1 - start));
    if (!piece.empty()) out.emplace_back(piece);
    start = j + 1;
    i = j;
  }
  std::string_view tail = trim(text.substr(start));
  if (!tail.empty()) out.emplace_back(tail);
  return out;
}

GroundingReport grounding_score(std::string_view evidence, std::string_view context,
                                double fuzz_threshold) {
  if (trim(context).empty()) throw Error("grounding requires a nonempty context");

  GroundingReport report;
  std::vector<std::string> norm_sentences;
  for (const auto& sentence : split_sentences(evidence)) {
    std::string norm = normalize_text(sentence);
    if (!norm.empty()) norm_sentences.push_back(std::move(norm));
  }
  report.sentence_count = norm_sentences.size();
  if (norm_sentences.empty()) return report;

  const std::string norm_ctx = normalize_text(context);
  const std::vector<Token> ctx_tokens = token_offsets(norm_ctx);

  for (std::size_t s = 0; s < norm_sentences.size(); ++s) {
    const std::string& sent = norm_sentences[s];
    std::size_t exact = norm_ctx.find(sent);
    if (exact != std::string::npos) {
      report.matched_spans.push_back({s, exact, exact + sent.size(), 1.0});
      ++report.matched_count;
      continue;
    }
    if (ctx_tokens.empty()) continue;

    std::vector<std::string> sent_tokens = split_whitespace(sent);
    const std::size_t m = sent_tokens.size();
    const std::size_t n = ctx_tokens.size();
    const std::size_t w = std::min(m, n);
    if (w == 0) continue;

    double best = -1.0;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i + w <= n; ++i) {
      std::size_t lcs = lcs_length(sent_tokens, ctx_tokens, i, w, norm_ctx);
      double ratio = 2.0 * static_cast<double>(lcs) / static_cast<double>(m + w);
      if (ratio > best) {
        best = ratio;
        best_i = i;
      }
    }
    if (best >= fuzz_threshold) {
      report.matched_spans.push_back(
          {s, ctx_tokens[best_i].begin, ctx_tokens[best_i + w - 1].end, best});
      ++report.matched_count;
    }
  }
  report.grounded_fraction =
      static_cast<double>(report.matched_count) / static_cast<double>(report.sentence_count);
  return report;
}

std::vector<GroundingReport> grounding_score_batch_serial(
    const std::vector<std::string>& evidences, const std::vector<std::string>& contexts,
    double fuzz_threshold) {
  if (evidences.size() != contexts.size())
    throw Error("grounding batch: evidence/context size mismatch");
  std::vector<GroundingReport> out(evidences.size());
  for (std::size_t i = 0; i < evidences.size(); ++i)
    out[i] = grounding_score(evidences[i], contexts[i], fuzz_threshold);
  return out;
}

std::vector<GroundingReport> grounding_score_batch(const std::vector<std::string>& evidences,
                                                   const std::vector<std::string>& contexts,
                                                   double fuzz_threshold) {
  if (evidences.size() != contexts.size())
    throw Error("grounding batch: evidence/context size mismatch");
  std::vector<GroundingReport> out(evidences.size());
  std::exception_ptr first_error;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (long long i = 0; i < static_cast<long long>(evidences.size()); ++i) {
    try {
      out[static_cast<std::size_t>(i)] =
          grounding_score(evidences[static_cast<std::size_t>(i)],
                          contexts[static_cast<std::size_t>(i)], fuzz_threshold);
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
      {
        if (!first_error) first_error = std::current_exception();
      }
    }
  }
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

QuestionType question_type(const Instance& instance) {
  bool yn = instance.task.answer_form == AnswerForm::yes_no;
  if (!yn && !instance.gold_answers.empty()) {
    yn = std::all_of(instance.gold_answers.begin(), instance.gold_answers.end(), is_yes_no_word);
  }
  if (yn) return QuestionType::yes_no;
  auto tokens = normalize_tokens(instance.query);
  if (!tokens.empty() && wh_words().count(tokens.front())) return QuestionType::wh;
  return QuestionType::other;
}

ErrorKind classify_error(const Instance& instance, std::string_view reasoning,
                         const FinalAnswer& pred, double fuzz_threshold, double grounded_min) {
  if (scored_correct(instance, pred))
    throw Error("classify_error: instance '" + instance.id + "' scored correct");

  if (question_type(instance) == QuestionType::yes_no) {
    auto stance = first_yes_no(reasoning);
    auto emitted = pred.label && (*pred.label == "yes" || *pred.label == "no")
                       ? pred.label
                       : first_yes_no(pred.text);
    if (stance && emitted && *stance != *emitted) return ErrorKind::yes_no_flip;
  }

  for (const auto& gold : instance.gold_answers) {
    if (trim(gold).empty() || is_yes_no_word(gold)) continue;
    if (contains_span(reasoning, gold)) return ErrorKind::answer_span_in_reasoning;
  }

  std::string context;
  for (const auto& doc : instance.context_docs) {
    if (!context.empty()) context += "\n\n";
    context += doc;
  }
  if (trim(context).empty()) return ErrorKind::other;
  GroundingReport report = grounding_score(reasoning, context, fuzz_threshold);
  if (report.grounded_fraction < grounded_min) return ErrorKind::ungrounded_hypothesis;

  return ErrorKind::other;
}

TaxonomySummary taxonomy_summary(const std::vector<ClassifiedError>& errors) {
  TaxonomySummary summary;
  summary.total = errors.size();
  for (ErrorKind kind : kErrorKinds) {
    TaxonomyRow row;
    row.kind = kind;
    for (const auto& err : errors) {
      if (err.kind != kind) continue;
      ++row.count;
      switch (err.qtype) {
        case QuestionType::wh: ++row.wh_count; break;
        case QuestionType::yes_no: ++row.yes_no_count; break;
        case QuestionType::other: ++row.other_count; break;
      }
    }
    row.pct = summary.total == 0
                  ? 0.0
                  : 100.0 * static_cast<double>(row.count) / static_cast<double>(summary.total);
    summary.rows.push_back(row);
  }
  return summary;
}

}  // namespace e2g
