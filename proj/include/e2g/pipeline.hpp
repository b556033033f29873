#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "e2g/backend.hpp"
#include "e2g/extract.hpp"
#include "e2g/prompt.hpp"
#include "e2g/task.hpp"

namespace e2g {

/// What the second step sees as context.
enum class GPolicy { evidence_only, evidence_plus_context, temp_answer, adaptive };

std::string_view to_string(GPolicy policy);
GPolicy g_policy_from_string(std::string_view s);

struct PipelinePlan {
  StrategyName strategy = StrategyName::e2g_base;
  bool two_step = true;
  GPolicy g_policy = GPolicy::evidence_only;
  std::size_t top_k = 5;
  std::size_t word_threshold = 200;

  friend bool operator==(const PipelinePlan&, const PipelinePlan&) = default;
};

nlohmann::json to_json(const PipelinePlan& plan);
PipelinePlan plan_from_json(const nlohmann::json& j);

/// Routing defaults: e2g-pro for the heavy-reasoning MRC tasks, e2g-base
/// otherwise; two steps only when the average context runs past
/// word_threshold words; policy by task shape, with per-benchmark
/// overrides (short-fact collections route evidence-only).
PipelinePlan default_plan(const TaskKind& task, std::size_t avg_context_words,
                          std::string_view benchmark = {});

/// First-token heuristic: wh-words, be/do/have forms and modals open a
/// well-formed question.
bool is_well_formed_question(std::string_view query);

/// Resolves adaptive to a concrete policy for one instance.
GPolicy resolve_policy(GPolicy policy, const Instance& instance);

/// Context string handed to the G step under the resolved policy. Falls
/// back to the raw first completion when the evidence section is empty.
std::string select_g_context(GPolicy policy, const Instance& instance, const EStepResult& e_step,
                             const std::string& original_context);

struct RunnerOptions {
  std::string model_id = "replay";
  int max_output_tokens_short = 256;
  int max_output_tokens_long = 1024;
  double temperature = 0.0;
  CostModel cost_model;
  std::optional<SynonymTable> synonyms;  // label mapping override

  int max_output_tokens_for(const TaskKind& task) const;
};

struct CallRecord {
  Step step = Step::single;
  std::string transcript_key;
  std::size_t prompt_tokens_est = 0;  // over the rendered prompt text
  std::int64_t prompt_tokens = 0;
  std::int64_t output_tokens = 0;
  std::int64_t latency_ms = 0;
  double cost = 0.0;

  friend bool operator==(const CallRecord&, const CallRecord&) = default;
};

struct RunOutcome {
  std::string instance_id;
  std::optional<EStepResult> e_step;  // parsed first completion
  FinalAnswer final;
  bool unmappable = false;
  int calls = 0;
  std::int64_t latency_ms_total = 0;
  double cost_total = 0.0;
  std::vector<CallRecord> call_records;

  friend bool operator==(const RunOutcome&, const RunOutcome&) = default;
};

nlohmann::json to_json(const RunOutcome& outcome);
RunOutcome outcome_from_json(const nlohmann::json& j);

/// One instance end to end: assemble context, prompt the E step, route,
/// optionally prompt the G step, then map the final answer. calls is 2 iff
/// the plan ran two steps.
RunOutcome run_instance(const Instance& instance, const PipelinePlan& plan,
                        CompletionBackend& backend, const RunnerOptions& options);

struct InstanceFailure {
  std::string instance_id;
  std::string error;
};

struct DatasetRunResult {
  std::vector<RunOutcome> outcomes;    // dataset order
  std::vector<InstanceFailure> failures;  // dataset order
};

/// Runs the dataset with a bounded worker pool (OpenMP when available;
/// parallelism 1 is the serial reference path). Per-instance failures are
/// collected, not fatal. With state_dir set, finished outcomes are
/// checkpointed and reruns resume past them.
DatasetRunResult run_dataset(const Dataset& dataset, const PipelinePlan& plan,
                             CompletionBackend& backend, const RunnerOptions& options,
                             int parallelism,
                             const std::optional<std::filesystem::path>& state_dir = std::nullopt);

}  // namespace e2g
