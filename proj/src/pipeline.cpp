#include "e2g/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <exception>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "e2g/errors.hpp"
#include "e2g/strings.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace e2g {

namespace {

Step step_from_string(std::string_view s) {
  if (s == "E") return Step::e;
  if (s == "G") return Step::g;
  if (s == "single") return Step::single;
  throw ParseError("unknown step '" + std::string(s) + "'");
}

const std::unordered_set<std::string>& question_openers() {
  static const std::unordered_set<std::string> words = {
      // wh
      "who", "what", "when", "where", "why", "which", "whose", "whom", "how",
      // be
      "am", "is", "are", "was", "were", "be", "been", "being",
      // do
      "do", "does", "did",
      // have
      "have", "has", "had",
      // modal
      "can", "could", "will", "would", "shall", "should", "may", "might", "must"};
  return words;
}

std::string first_alpha_word(std::string_view text) {
  std::string out;
  for (char c : text) {
    bool alpha = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
    if (alpha) {
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!out.empty()) {
      break;
    }
  }
  return out;
}

std::string state_file_name(const std::string& instance_id) {
  return sha256_hex(instance_id).substr(0, 16) + ".json";
}

}  // namespace

std::string_view to_string(GPolicy policy) {
  switch (policy) {
    case GPolicy::evidence_only: return "evidence-only";
    case GPolicy::evidence_plus_context: return "evidence-plus-context";
    case GPolicy::temp_answer: return "temp-answer";
    case GPolicy::adaptive: return "adaptive";
  }
  throw Error("bad GPolicy value");
}

GPolicy g_policy_from_string(std::string_view s) {
  if (s == "evidence-only") return GPolicy::evidence_only;
  if (s == "evidence-plus-context") return GPolicy::evidence_plus_context;
  if (s == "temp-answer") return GPolicy::temp_answer;
  if (s == "adaptive") return GPolicy::adaptive;
  throw ParseError("unknown g-policy '" + std::string(s) + "'");
}

nlohmann::json to_json(const PipelinePlan& plan) {
  return nlohmann::json{{"strategy", to_string(plan.strategy)},
                        {"two_step", plan.two_step},
                        {"g_policy", to_string(plan.g_policy)},
                        {"top_k", plan.top_k},
                        {"word_threshold", plan.word_threshold}};
}

PipelinePlan plan_from_json(const nlohmann::json& j) {
  PipelinePlan plan;
  plan.strategy = strategy_name_from_string(j.at("strategy").get<std::string>());
  plan.two_step = j.at("two_step").get<bool>();
  plan.g_policy = g_policy_from_string(j.at("g_policy").get<std::string>());
  plan.top_k = j.at("top_k").get<std::size_t>();
  plan.word_threshold = j.at("word_threshold").get<std::size_t>();
  return plan;
}

PipelinePlan default_plan(const TaskKind& task, std::size_t avg_context_words,
                          std::string_view benchmark) {
  PipelinePlan plan;
  bool heavy_reasoning =
      task.name == TaskName::logical_mrc || task.name == TaskName::arithmetic_mrc;
  plan.strategy = heavy_reasoning ? StrategyName::e2g_pro : StrategyName::e2g_base;
  plan.two_step = avg_context_words > plan.word_threshold;

  switch (task.name) {
    case TaskName::long_form_qa:
      plan.g_policy = GPolicy::temp_answer;
      break;
    case TaskName::open_qa:
      plan.g_policy = GPolicy::adaptive;
      break;
    default:
      plan.g_policy = GPolicy::evidence_only;
      break;
  }

  // short-fact collections do better on pure evidence; keyed by benchmark
  static const std::unordered_map<std::string, GPolicy> overrides = {
      {"tqa", GPolicy::evidence_only},
  };
  if (!benchmark.empty()) {
    auto it = overrides.find(std::string(benchmark));
    if (it != overrides.end()) plan.g_policy = it->second;
  }
  return plan;
}

bool is_well_formed_question(std::string_view query) {
  std::string opener = first_alpha_word(query);
  if (opener.empty()) return false;
  return question_openers().count(opener) > 0;
}

GPolicy resolve_policy(GPolicy policy, const Instance& instance) {
  if (policy != GPolicy::adaptive) return policy;
  return is_well_formed_question(instance.query) ? GPolicy::evidence_plus_context
                                                 : GPolicy::evidence_only;
}

std::string select_g_context(GPolicy policy, const Instance& instance, const EStepResult& e_step,
                             const std::string& original_context) {
  policy = resolve_policy(policy, instance);
  const std::string& evidence = e_step.evidence.empty() ? e_step.raw : e_step.evidence;
  switch (policy) {
    case GPolicy::evidence_only:
      return evidence;
    case GPolicy::evidence_plus_context:
      return evidence + "\n\n" + original_context;
    case GPolicy::temp_answer:
      return e_step.answer.empty() ? e_step.raw : e_step.answer;
    case GPolicy::adaptive:
      break;  // resolved above
  }
  throw Error("bad GPolicy value");
}

int RunnerOptions::max_output_tokens_for(const TaskKind& task) const {
  return task.answer_form == AnswerForm::free_text ? max_output_tokens_long
                                                   : max_output_tokens_short;
}

nlohmann::json to_json(const RunOutcome& outcome) {
  nlohmann::json j{{"instance_id", outcome.instance_id},
                   {"unmappable", outcome.unmappable},
                   {"calls", outcome.calls},
                   {"latency_ms_total", outcome.latency_ms_total},
                   {"cost_total", outcome.cost_total}};
  if (outcome.e_step) {
    j["e_step"] = {{"answer", outcome.e_step->answer},
                   {"evidence", outcome.e_step->evidence},
                   {"raw", outcome.e_step->raw},
                   {"mode", to_string(outcome.e_step->mode)}};
  } else {
    j["e_step"] = nullptr;
  }
  j["final"] = {{"text", outcome.final.text}};
  j["final"]["label"] = outcome.final.label ? nlohmann::json(*outcome.final.label)
                                            : nlohmann::json(nullptr);
  nlohmann::json records = nlohmann::json::array();
  for (const auto& rec : outcome.call_records) {
    records.push_back({{"step", to_string(rec.step)},
                       {"transcript_key", rec.transcript_key},
                       {"prompt_tokens_est", rec.prompt_tokens_est},
                       {"prompt_tokens", rec.prompt_tokens},
                       {"output_tokens", rec.output_tokens},
                       {"latency_ms", rec.latency_ms},
                       {"cost", rec.cost}});
  }
  j["call_records"] = std::move(records);
  return j;
}

RunOutcome outcome_from_json(const nlohmann::json& j) {
  RunOutcome outcome;
  outcome.instance_id = j.at("instance_id").get<std::string>();
  outcome.unmappable = j.at("unmappable").get<bool>();
  outcome.calls = j.at("calls").get<int>();
  outcome.latency_ms_total = j.at("latency_ms_total").get<std::int64_t>();
  outcome.cost_total = j.at("cost_total").get<double>();
  if (!j.at("e_step").is_null()) {
    const auto& e = j.at("e_step");
    EStepResult parsed;
    parsed.answer = e.at("answer").get<std::string>();
    parsed.evidence = e.at("evidence").get<std::string>();
    parsed.raw = e.at("raw").get<std::string>();
    parsed.mode = parse_mode_from_string(e.at("mode").get<std::string>());
    outcome.e_step = std::move(parsed);
  }
  outcome.final.text = j.at("final").at("text").get<std::string>();
  if (!j.at("final").at("label").is_null())
    outcome.final.label = j.at("final").at("label").get<std::string>();
  for (const auto& rec : j.at("call_records")) {
    CallRecord record;
    record.step = step_from_string(rec.at("step").get<std::string>());
    record.transcript_key = rec.at("transcript_key").get<std::string>();
    record.prompt_tokens_est = rec.at("prompt_tokens_est").get<std::size_t>();
    record.prompt_tokens = rec.at("prompt_tokens").get<std::int64_t>();
    record.output_tokens = rec.at("output_tokens").get<std::int64_t>();
    record.latency_ms = rec.at("latency_ms").get<std::int64_t>();
    record.cost = rec.at("cost").get<double>();
    outcome.call_records.push_back(std::move(record));
  }
  return outcome;
}

namespace {

CallRecord make_record(Step step, const CompletionRequest& request,
                       const CompletionResponse& response, std::size_t prompt_tokens_est,
                       const CostModel& cost_model) {
  CallRecord record;
  record.step = step;
  record.transcript_key = cache_key_for(request).digest;
  record.prompt_tokens_est = prompt_tokens_est;
  record.prompt_tokens = response.prompt_tokens;
  record.output_tokens = response.output_tokens;
  record.latency_ms = response.latency_ms;
  record.cost = estimate_cost(response, cost_model);
  return record;
}

}  // namespace

RunOutcome run_instance(const Instance& instance, const PipelinePlan& plan,
                        CompletionBackend& backend, const RunnerOptions& options) {
  const Strategy& strat = strategy(plan.strategy);
  if (plan.two_step && strat.steps < 2)
    throw ConfigError("strategy '" + std::string(to_string(plan.strategy)) +
                      "' cannot run two steps");

  const TaskKind& kind = instance.task;
  const std::string context = assemble_context(instance, plan.top_k);
  const int max_tokens = options.max_output_tokens_for(kind);

  RunOutcome outcome;
  outcome.instance_id = instance.id;

  const Step first_step = strat.steps == 2 ? Step::e : Step::single;
  PromptBundle first_bundle = build_step_prompt(instance, strat, first_step, context);
  CompletionRequest first_request{options.model_id, first_bundle.full_text, max_tokens,
                                  options.temperature,
                                  instance.id + ":" + std::string(to_string(first_step))};
  CompletionResponse first_response = backend.complete(first_request);
  outcome.call_records.push_back(make_record(first_step, first_request, first_response,
                                             first_bundle.approx_tokens, options.cost_model));

  EStepResult parsed = parse_e_step(first_response.text);
  outcome.e_step = parsed;

  std::string final_raw = first_response.text;
  if (plan.two_step) {
    std::string g_context = select_g_context(plan.g_policy, instance, parsed, context);
    PromptBundle g_bundle = build_step_prompt(instance, strat, Step::g, g_context);
    CompletionRequest g_request{options.model_id, g_bundle.full_text, max_tokens,
                                options.temperature, instance.id + ":G"};
    CompletionResponse g_response = backend.complete(g_request);
    outcome.call_records.push_back(make_record(Step::g, g_request, g_response,
                                               g_bundle.approx_tokens, options.cost_model));
    final_raw = g_response.text;
  }

  try {
    const SynonymTable& table = options.synonyms ? *options.synonyms : SynonymTable::defaults();
    outcome.final = extract_final_answer(final_raw, kind, instance.options, table);
  } catch (const UnmappableAnswerError&) {
    outcome.final = FinalAnswer{std::string(trim(final_raw)), std::nullopt};
    outcome.unmappable = true;
  }

  outcome.calls = static_cast<int>(outcome.call_records.size());
  for (const auto& rec : outcome.call_records) {
    outcome.latency_ms_total += rec.latency_ms;
    outcome.cost_total += rec.cost;
  }
  return outcome;
}

namespace {

std::optional<RunOutcome> load_state(const std::filesystem::path& dir, const std::string& id) {
  std::filesystem::path path = dir / state_file_name(id);
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    nlohmann::json j = nlohmann::json::parse(in);
    if (j.value("id", "") != id) return std::nullopt;
    return outcome_from_json(j.at("outcome"));
  } catch (const std::exception&) {
    return std::nullopt;  // recompute on any damage
  }
}

void save_state(const std::filesystem::path& dir, const std::string& id,
                const RunOutcome& outcome) {
  std::filesystem::path path = dir / state_file_name(id);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write state file '" + tmp.string() + "'");
    nlohmann::json j{{"id", id}, {"outcome", to_json(outcome)}};
    out << j.dump(2) << "\n";
    out.flush();
    if (!out) throw Error("short write to '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

DatasetRunResult run_dataset(const Dataset& dataset, const PipelinePlan& plan,
                             CompletionBackend& backend, const RunnerOptions& options,
                             int parallelism,
                             const std::optional<std::filesystem::path>& state_dir) {
  if (parallelism < 1) throw ConfigError("parallelism must be >= 1");

  const std::size_t n = dataset.instances.size();
  std::vector<std::optional<RunOutcome>> results(n);
  std::vector<std::optional<std::string>> errors(n);

  if (state_dir) {
    std::filesystem::create_directories(*state_dir);
    for (std::size_t i = 0; i < n; ++i)
      results[i] = load_state(*state_dir, dataset.instances[i].id);
  }

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(parallelism)
#endif
  for (long long ll = 0; ll < static_cast<long long>(n); ++ll) {
    const std::size_t i = static_cast<std::size_t>(ll);
    if (results[i]) continue;
    try {
      RunOutcome outcome = run_instance(dataset.instances[i], plan, backend, options);
      if (state_dir) save_state(*state_dir, dataset.instances[i].id, outcome);
      results[i] = std::move(outcome);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }

  DatasetRunResult out;
  for (std::size_t i = 0; i < n; ++i) {
    if (results[i])
      out.outcomes.push_back(std::move(*results[i]));
    else
      out.failures.push_back({dataset.instances[i].id,
                              errors[i] ? *errors[i] : std::string("unknown failure")});
  }
  return out;
}

}  // namespace e2g
