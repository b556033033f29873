#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "e2g/backend.hpp"
#include "e2g/pipeline.hpp"
#include "e2g/report.hpp"
#include "e2g/task.hpp"

namespace e2g {

struct RunConfig {
  std::filesystem::path dataset_path;
  std::string schema;  // benchmark key (e.g. "hotpotqa") or task name
  std::string split = "dev";

  // plan overrides; unset fields come from default_plan
  std::optional<StrategyName> strategy;
  std::optional<bool> two_step;
  std::optional<GPolicy> g_policy;
  std::optional<std::size_t> top_k;
  std::optional<std::size_t> word_threshold;

  std::string backend_mode = "replay";  // replay | record | live
  std::string model_id = "replay";
  std::filesystem::path store_root = "transcripts";
  std::filesystem::path out_dir = "runs";
  std::optional<std::string> run_id;
  int parallelism = 1;
  bool resume = false;
  double temperature = 0.0;
  CostModel cost_model;
  AnalysisOptions analysis;
  std::optional<std::filesystem::path> synonyms_path;
};

/// Everything derived from the config before any backend call.
struct ResolvedRun {
  Dataset dataset;
  std::string dataset_digest;  // of the dataset file bytes
  TaskKind task;
  std::string benchmark_key;  // empty when schema named a bare task
  PipelinePlan plan;
  RunnerOptions options;
  std::string run_id;
};

/// Loads the dataset, resolves the plan (benchmark defaults plus overrides)
/// and derives the run id from dataset digest, plan, backend mode and model.
ResolvedRun resolve_run(const RunConfig& config);

/// Backend per config.backend_mode. Live and record modes read
/// E2G_API_BASE / E2G_API_KEY and fail with ConfigError when unset.
std::unique_ptr<CompletionBackend> make_backend(const RunConfig& config);

struct RunRecord {
  std::string run_id;
  std::filesystem::path dir;
  nlohmann::json report;
};

/// Full benchmark evaluation: run, score, analyze, persist. The run
/// directory gets report.json and outcomes.jsonl (both deterministic,
/// no timestamps) plus meta.json (wall-clock info lives only there).
RunRecord execute_run(const RunConfig& config, CompletionBackend& backend);

nlohmann::json load_report(const std::filesystem::path& run_dir);

struct CompareResult {
  std::vector<nlohmann::json> reports;
  std::string rendered;  // fixed-width table plus deltas against the first run
};

/// Side-by-side metric comparison. All runs must have evaluated the same
/// dataset file (equal digests) or the comparison is refused.
CompareResult compare_runs(const std::vector<std::filesystem::path>& run_dirs);

struct TaxonomyFiles {
  std::filesystem::path taxonomy_tsv;
  std::filesystem::path grounding_hist_tsv;
  std::filesystem::path recall_vs_f1_tsv;
  bool has_recall = false;
};

/// Plot-ready TSV exports derived from a finished run directory.
TaxonomyFiles write_taxonomy_files(const std::filesystem::path& run_dir,
                                   const std::filesystem::path& out_dir);

}  // namespace e2g
