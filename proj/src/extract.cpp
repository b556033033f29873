#include "e2g/extract.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "e2g/errors.hpp"
#include "e2g/metrics.hpp"
#include "e2g/strings.hpp"

namespace e2g {

namespace {

constexpr std::string_view kAnswerLabel = "answer:";
constexpr std::string_view kEvidenceLabel = "evidence and explanation:";

// Embedded default synonym sets; resources/label_synonyms.txt mirrors this
// and can be edited without rebuilding.
constexpr std::string_view kDefaultSynonyms = R"(# label: comma-separated keyword stems, earliest hit wins
SUPPORTS: support, true, correct, confirm, entail
REFUTES: refute, not support, does not support, contradict, false, incorrect, deny
)";

std::string trimmed(std::string_view s) { return std::string(trim(s)); }

}  // namespace

std::string_view to_string(ParseMode mode) {
  switch (mode) {
    case ParseMode::labeled: return "labeled";
    case ParseMode::heuristic: return "heuristic";
    case ParseMode::fallback_whole: return "fallback-whole";
  }
  throw Error("bad ParseMode value");
}

ParseMode parse_mode_from_string(std::string_view s) {
  if (s == "labeled") return ParseMode::labeled;
  if (s == "heuristic") return ParseMode::heuristic;
  if (s == "fallback-whole") return ParseMode::fallback_whole;
  throw ParseError("unknown parse mode '" + std::string(s) + "'");
}

EStepResult parse_e_step(const std::string& raw) {
  if (trim(raw).empty()) throw ParseError("empty completion");

  EStepResult out;
  out.raw = raw;

  std::size_t apos = find_icase(raw, kAnswerLabel);
  std::size_t epos = find_icase(raw, kEvidenceLabel);
  if (apos != std::string::npos && epos != std::string::npos && apos < epos) {
    std::string answer = trimmed(
        std::string_view(raw).substr(apos + kAnswerLabel.size(), epos - apos - kAnswerLabel.size()));
    std::string evidence = trimmed(std::string_view(raw).substr(epos + kEvidenceLabel.size()));
    if (!evidence.empty()) {
      out.answer = std::move(answer);
      out.evidence = std::move(evidence);
      out.mode = ParseMode::labeled;
      return out;
    }
    // labeled shell with an empty rationale: fall through
  }

  std::size_t nl = raw.find('\n');
  if (nl != std::string::npos) {
    std::string rest = trimmed(std::string_view(raw).substr(nl + 1));
    if (!rest.empty()) {
      out.answer = trimmed(std::string_view(raw).substr(0, nl));
      out.evidence = std::move(rest);
      out.mode = ParseMode::heuristic;
      return out;
    }
  }

  out.answer = trimmed(raw);
  out.evidence.clear();
  out.mode = ParseMode::fallback_whole;
  return out;
}

const SynonymTable& SynonymTable::defaults() {
  static const SynonymTable table = SynonymTable::parse(kDefaultSynonyms);
  return table;
}

SynonymTable SynonymTable::parse(std::string_view text) {
  SynonymTable table;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    std::string_view line =
        end == std::string_view::npos ? text.substr(start) : text.substr(start, end - start);
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;

    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    std::size_t colon = line.find(':');
    if (colon == std::string_view::npos || colon == 0)
      throw ParseError("synonym table line " + std::to_string(line_no) +
                       ": expected 'LABEL: phrase, phrase'");
    Entry entry;
    entry.label = trimmed(line.substr(0, colon));
    std::string_view rest = line.substr(colon + 1);
    std::size_t p = 0;
    while (p <= rest.size()) {
      std::size_t comma = rest.find(',', p);
      std::string_view piece =
          comma == std::string_view::npos ? rest.substr(p) : rest.substr(p, comma - p);
      p = comma == std::string_view::npos ? rest.size() + 1 : comma + 1;
      std::string phrase = normalize_text(piece);
      if (!phrase.empty()) entry.phrases.push_back(std::move(phrase));
    }
    if (entry.phrases.empty())
      throw ParseError("synonym table line " + std::to_string(line_no) + ": label '" +
                       entry.label + "' has no phrases");
    table.entries_.push_back(std::move(entry));
  }
  if (table.entries_.empty()) throw ParseError("synonym table has no entries");
  return table;
}

SynonymTable SynonymTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open synonym table '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::optional<std::string> SynonymTable::match(std::string_view text) const {
  std::string norm = normalize_text(text);
  if (norm.empty()) return std::nullopt;
  std::optional<std::string> best;
  std::size_t best_pos = std::string::npos;
  std::size_t best_len = 0;
  for (const auto& entry : entries_) {
    for (const auto& phrase : entry.phrases) {
      std::size_t pos = norm.find(phrase);
      if (pos == std::string::npos) continue;
      if (pos < best_pos || (pos == best_pos && phrase.size() > best_len)) {
        best_pos = pos;
        best_len = phrase.size();
        best = entry.label;
      }
    }
  }
  return best;
}

std::optional<std::string> first_yes_no(std::string_view text) {
  for (const auto& tok : normalize_tokens(text)) {
    if (tok == "yes" || tok == "no") return tok;
  }
  return std::nullopt;
}

bool contains_span(std::string_view haystack, std::string_view span) {
  std::string h = normalize_text(haystack);
  std::string s = normalize_text(span);
  if (s.empty()) return h.empty();
  return h.find(s) != std::string::npos;
}

namespace {

// Prefers the labeled answer section when present so trailing chatter does
// not change the mapped label.
std::string answer_section(const std::string& raw) {
  std::size_t apos = find_icase(raw, kAnswerLabel);
  if (apos == std::string::npos) return raw;
  std::size_t begin = apos + kAnswerLabel.size();
  std::size_t end = find_icase(raw, kEvidenceLabel, begin);
  if (end == std::string::npos) end = raw.size();
  std::string section = trimmed(std::string_view(raw).substr(begin, end - begin));
  return section.empty() ? raw : section;
}

std::string strip_answer_framing(const std::string& raw) {
  std::string section = answer_section(raw);
  std::size_t nl = section.find('\n');
  if (nl != std::string::npos) section = trimmed(std::string_view(section).substr(0, nl));
  return section;
}

std::string option_key(std::size_t index) {
  if (index >= 26) throw ConfigError("more than 26 options");
  return std::string(1, static_cast<char>('A' + index));
}

// Accepts "B", "b.", "(B)", "B:", "option C". The section must be the bare
// key; a letter inside a sentence is not a choice.
std::optional<std::string> letter_key(std::string_view text, std::size_t n_options) {
  std::string_view s = trim(text);
  if (starts_with_icase(s, "option ")) s = trim(s.substr(7));
  if (!s.empty() && s.front() == '(') s = s.substr(1);
  if (s.empty()) return std::nullopt;
  char c = static_cast<char>(std::tolower(static_cast<unsigned char>(s.front())));
  if (c < 'a' || c > 'z') return std::nullopt;
  s = s.substr(1);
  while (!s.empty() && (s.front() == ')' || s.front() == '.' || s.front() == ':' || s.front() == ','))
    s = s.substr(1);
  if (!trim(s).empty()) return std::nullopt;
  std::size_t idx = static_cast<std::size_t>(c - 'a');
  if (idx >= n_options) return std::nullopt;
  return option_key(idx);
}

std::optional<std::string> match_option(const std::string& text,
                                        const std::vector<std::string>& options) {
  if (auto key = letter_key(text, options.size())) return key;
  // earliest option text occurrence
  std::string norm = normalize_text(text);
  std::size_t best_pos = std::string::npos;
  std::optional<std::string> best;
  for (std::size_t i = 0; i < options.size(); ++i) {
    std::string opt = normalize_text(options[i]);
    if (opt.empty()) continue;
    std::size_t pos = norm.find(opt);
    if (pos != std::string::npos && pos < best_pos) {
      best_pos = pos;
      best = option_key(i);
    }
  }
  return best;
}

std::optional<std::string> canonical_class(const std::string& text, const TaskKind& task,
                                           const SynonymTable& synonyms) {
  auto hit = synonyms.match(text);
  if (!hit) return std::nullopt;
  if (task.class_labels.empty()) return hit;
  for (const auto& label : task.class_labels) {
    if (normalize_text(label) == normalize_text(*hit)) return label;
  }
  // the table may carry labels outside this task's set
  return std::nullopt;
}

}  // namespace

FinalAnswer extract_final_answer(const std::string& raw, const TaskKind& task,
                                 const std::optional<std::vector<std::string>>& options,
                                 const SynonymTable& synonyms) {
  if (trim(raw).empty()) throw ParseError("empty completion");

  FinalAnswer out;
  switch (task.answer_form) {
    case AnswerForm::short_span: {
      out.text = strip_answer_framing(raw);
      if (out.text.empty()) out.text = trimmed(raw);
      return out;
    }
    case AnswerForm::free_text: {
      out.text = answer_section(raw);
      return out;
    }
    case AnswerForm::yes_no: {
      auto stance = first_yes_no(answer_section(raw));
      if (!stance) stance = first_yes_no(raw);
      if (!stance) throw UnmappableAnswerError("no yes/no stance in completion");
      out.label = *stance;
      out.text = *stance;
      return out;
    }
    case AnswerForm::class_label: {
      auto label = canonical_class(answer_section(raw), task, synonyms);
      if (!label) label = canonical_class(raw, task, synonyms);
      if (!label) throw UnmappableAnswerError("no class label in completion");
      out.label = *label;
      out.text = *label;
      return out;
    }
    case AnswerForm::option_choice: {
      if (!options || options->empty())
        throw ConfigError("option task without options");
      auto key = match_option(strip_answer_framing(raw), *options);
      if (!key) key = match_option(raw, *options);
      if (!key) throw UnmappableAnswerError("no option choice in completion");
      std::size_t idx = static_cast<std::size_t>((*key)[0] - 'A');
      out.label = *key;
      out.text = (*options)[idx];
      return out;
    }
  }
  throw Error("bad AnswerForm value");
}

std::optional<std::string> gold_label(const Instance& instance) {
  const TaskKind& kind = instance.task;
  if (instance.gold_answers.empty()) return std::nullopt;
  const std::string& gold = instance.gold_answers.front();
  switch (kind.answer_form) {
    case AnswerForm::class_label: {
      for (const auto& label : kind.class_labels) {
        if (normalize_text(label) == normalize_text(gold)) return label;
      }
      return std::nullopt;
    }
    case AnswerForm::yes_no:
      return first_yes_no(gold);
    case AnswerForm::option_choice: {
      if (!instance.options) return std::nullopt;
      for (std::size_t i = 0; i < instance.options->size(); ++i) {
        if (normalize_text((*instance.options)[i]) == normalize_text(gold))
          return option_key(i);
      }
      return std::nullopt;
    }
    default:
      return std::nullopt;
  }
}

bool scored_correct(const Instance& instance, const FinalAnswer& pred) {
  const TaskKind& kind = instance.task;
  bool label_task = kind.answer_form == AnswerForm::class_label ||
                    kind.answer_form == AnswerForm::yes_no ||
                    kind.answer_form == AnswerForm::option_choice;
  if (label_task) {
    auto gold = gold_label(instance);
    if (!gold) return false;
    return accuracy(pred.label, *gold) == 1;
  }
  return exact_match(pred.text, instance.gold_answers) == 1;
}

}  // namespace e2g
