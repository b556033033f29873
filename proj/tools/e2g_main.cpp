// e2g command line: run evaluations, compare runs, export plot data,
// move transcript caches between machines.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "e2g/errors.hpp"
#include "e2g/runner.hpp"
#include "e2g/store.hpp"

namespace {

using namespace e2g;

std::string fmt(double v, int precision = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

nlohmann::json load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  try {
    nlohmann::json j = nlohmann::json::parse(in);
    if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("bad config file '" + path.string() + "': " + e.what());
  }
}

// precedence: CLI flag > config file > built-in default
template <typename T>
void apply_key(const nlohmann::json& file, const CLI::Option* opt, const char* key, T& slot) {
  if (opt->count() > 0 || !file.contains(key)) return;
  try {
    slot = file.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

struct RunArgs {
  std::string dataset;
  std::string schema;
  std::string split = "dev";
  std::string strategy;  // empty = plan default
  int steps = 0;         // 0 = plan default, else 1 or 2
  std::string g_policy;  // empty = plan default
  std::size_t top_k = 0; // 0 = plan default
  std::size_t word_threshold = 0;
  std::string backend = "replay";
  std::string model = "replay";
  std::string store_root;
  std::string out_dir = "runs";
  std::string run_id;
  int parallelism = 1;
  bool resume = false;
  double temperature = 0.0;
  std::string synonyms;
  std::string config_path;
};

RunConfig to_run_config(const RunArgs& args) {
  RunConfig config;
  config.dataset_path = args.dataset;
  config.schema = args.schema;
  config.split = args.split;
  if (!args.strategy.empty()) config.strategy = strategy_name_from_string(args.strategy);
  if (args.steps != 0) {
    if (args.steps != 1 && args.steps != 2) throw ConfigError("--steps must be 1 or 2");
    config.two_step = args.steps == 2;
  }
  if (!args.g_policy.empty()) config.g_policy = g_policy_from_string(args.g_policy);
  if (args.top_k != 0) config.top_k = args.top_k;
  if (args.word_threshold != 0) config.word_threshold = args.word_threshold;
  config.backend_mode = args.backend;
  config.model_id = args.model;
  if (!args.store_root.empty()) {
    config.store_root = args.store_root;
  } else if (const char* env = std::getenv("E2G_STORE_ROOT"); env && *env) {
    config.store_root = env;
  }
  config.out_dir = args.out_dir;
  if (!args.run_id.empty()) config.run_id = args.run_id;
  config.parallelism = args.parallelism;
  config.resume = args.resume;
  config.temperature = args.temperature;
  if (!args.synonyms.empty()) config.synonyms_path = args.synonyms;
  return config;
}

void print_taxonomy_table(const nlohmann::json& report) {
  const auto& taxonomy = report.at("taxonomy");
  std::size_t total = taxonomy.at("total_errors").get<std::size_t>();
  if (total == 0) {
    std::cout << "note: no errors to categorize\n";
    return;
  }
  std::cout << "errors: " << total << " total\n";
  for (const auto& row : taxonomy.at("rows")) {
    std::cout << "  " << row.at("category").get<std::string>() << " "
              << row.at("count").get<std::size_t>() << " ("
              << fmt(row.at("pct").get<double>(), 1) << "%)  wh "
              << row.at("wh").get<std::size_t>() << ", yes-no "
              << row.at("yes_no").get<std::size_t>() << ", other "
              << row.at("other").get<std::size_t>() << "\n";
  }
}

void print_run_summary(const RunRecord& record) {
  const nlohmann::json& report = record.report;
  const auto& counts = report.at("counts");
  std::cout << "run " << record.run_id << " -> " << record.dir.string() << "\n";
  std::cout << "instances " << counts.at("instances").get<std::size_t>() << ", succeeded "
            << counts.at("succeeded").get<std::size_t>() << ", failed "
            << counts.at("failed").get<std::size_t>() << ", unmappable "
            << counts.at("unmappable").get<std::size_t>() << "\n";

  std::cout << "metrics:";
  for (const auto& [name, value] : report.at("metrics").items())
    std::cout << " " << name << " " << fmt(value.get<double>());
  std::cout << "\n";

  const auto& totals = report.at("totals");
  std::cout << "calls " << totals.at("calls").get<std::int64_t>() << ", prompt tokens "
            << totals.at("prompt_tokens").get<std::int64_t>() << ", output tokens "
            << totals.at("output_tokens").get<std::int64_t>() << ", cost "
            << fmt(totals.at("cost").get<double>(), 4) << ", latency "
            << totals.at("latency_ms").get<std::int64_t>() << " ms\n";

  const auto& grounding = report.at("grounding");
  std::cout << "grounding: analyzed " << grounding.at("analyzed").get<std::size_t>();
  if (!grounding.at("mean_fraction").is_null())
    std::cout << ", mean fraction " << fmt(grounding.at("mean_fraction").get<double>(), 3);
  std::cout << "\n";

  print_taxonomy_table(report);

  for (const auto& failure : report.at("failures"))
    std::cout << "failed: " << failure.at("instance_id").get<std::string>() << ": "
              << failure.at("error").get<std::string>() << "\n";
}

int cmd_run(const RunArgs& args) {
  RunConfig config = to_run_config(args);
  resolve_run(config);  // config problems surface before the backend exists
  auto backend = make_backend(config);
  RunRecord record = execute_run(config, *backend);
  print_run_summary(record);
  return record.report.at("counts").at("failed").get<std::size_t>() == 0 ? 0 : 1;
}

int cmd_compare(const std::vector<std::string>& dirs) {
  std::vector<std::filesystem::path> paths(dirs.begin(), dirs.end());
  CompareResult result = compare_runs(paths);
  std::cout << result.rendered;
  return 0;
}

int cmd_taxonomy(const std::string& run_dir, std::string out_dir) {
  std::filesystem::path run_path = run_dir;
  if (out_dir.empty()) out_dir = (run_path / "plots").string();
  nlohmann::json report = load_report(run_path);
  print_taxonomy_table(report);
  TaxonomyFiles files = write_taxonomy_files(run_path, out_dir);
  std::cout << "wrote " << files.taxonomy_tsv.string() << "\n";
  std::cout << "wrote " << files.grounding_hist_tsv.string() << "\n";
  std::cout << "wrote " << files.recall_vs_f1_tsv.string();
  if (!files.has_recall) std::cout << " (no recall annotations)";
  std::cout << "\n";
  return 0;
}

std::filesystem::path store_root_or_env(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("E2G_STORE_ROOT"); env && *env) return env;
  return "transcripts";
}

int cmd_export_cache(const std::string& store_root, const std::string& archive) {
  TranscriptStore store(store_root_or_env(store_root));
  export_store(store, archive);
  std::cout << "exported " << store.keys().size() << " transcripts to " << archive << "\n";
  return 0;
}

int cmd_import_cache(const std::string& store_root, const std::string& archive) {
  TranscriptStore store(store_root_or_env(store_root));
  std::size_t added = import_store(store, archive);
  std::cout << "imported " << added << " new transcripts into " << store.root().string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"E2G two-step prompting harness: run benchmark evaluations against a live or "
               "replayed model, compare strategies, and export analysis data."};
  app.require_subcommand(1);

  RunArgs args;
  CLI::App* run = app.add_subcommand("run", "evaluate a dataset and write a run directory");
  auto* o_dataset = run->add_option("--dataset", args.dataset, "dataset JSONL path");
  auto* o_schema = run->add_option("--schema", args.schema,
                                   "benchmark key (hotpotqa, fever, ...) or task name");
  auto* o_split = run->add_option("--split", args.split, "dataset split label");
  auto* o_strategy =
      run->add_option("--strategy", args.strategy, "cot | e2g-base | e2g-pro (default: routed)");
  auto* o_steps = run->add_option("--steps", args.steps, "force 1 or 2 steps");
  auto* o_policy = run->add_option(
      "--g-policy", args.g_policy,
      "evidence-only | evidence-plus-context | temp-answer | adaptive (default: routed)");
  auto* o_top_k = run->add_option("--top-k", args.top_k, "documents per prompt");
  auto* o_threshold =
      run->add_option("--word-threshold", args.word_threshold, "two-step context word cutoff");
  auto* o_backend = run->add_option("--backend", args.backend, "replay | record | live");
  auto* o_model = run->add_option("--model", args.model, "model id sent to the backend");
  auto* o_store = run->add_option("--store", args.store_root,
                                  "transcript store root (default: $E2G_STORE_ROOT or transcripts)");
  auto* o_out = run->add_option("--out", args.out_dir, "directory that receives run folders");
  auto* o_run_id = run->add_option("--run-id", args.run_id, "explicit run id");
  auto* o_par = run->add_option("--parallelism", args.parallelism, "worker count");
  auto* o_resume = run->add_flag("--resume", args.resume, "keep finished instances from a prior run");
  auto* o_temp = run->add_option("--temperature", args.temperature, "sampling temperature");
  auto* o_syn = run->add_option("--synonyms", args.synonyms, "label synonym table file");
  run->add_option("--config", args.config_path,
                  "JSON config file; CLI flags win over file keys");

  std::vector<std::string> compare_dirs;
  CLI::App* compare = app.add_subcommand("compare", "side-by-side metrics for finished runs");
  compare->add_option("dirs", compare_dirs, "run directories")->expected(-1);

  std::string taxonomy_dir;
  std::string taxonomy_out;
  CLI::App* taxonomy = app.add_subcommand("taxonomy", "error taxonomy and plot data for a run");
  taxonomy->add_option("dir", taxonomy_dir, "run directory")->required();
  taxonomy->add_option("--out", taxonomy_out, "output directory (default: <run>/plots)");

  std::string cache_store;
  std::string cache_archive;
  CLI::App* exp = app.add_subcommand("export-cache", "write the transcript store as one JSONL");
  exp->add_option("archive", cache_archive, "archive path to write")->required();
  exp->add_option("--store", cache_store, "transcript store root");

  std::string import_store_flag;
  std::string import_archive;
  CLI::App* imp = app.add_subcommand("import-cache", "merge an exported archive into a store");
  imp->add_option("archive", import_archive, "archive path to read")->required();
  imp->add_option("--store", import_store_flag, "transcript store root");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad flags are config errors
  }

  try {
    if (run->parsed()) {
      if (!args.config_path.empty()) {
        nlohmann::json file = load_config_file(args.config_path);
        apply_key(file, o_dataset, "dataset", args.dataset);
        apply_key(file, o_schema, "schema", args.schema);
        apply_key(file, o_split, "split", args.split);
        apply_key(file, o_strategy, "strategy", args.strategy);
        apply_key(file, o_steps, "steps", args.steps);
        apply_key(file, o_policy, "g_policy", args.g_policy);
        apply_key(file, o_top_k, "top_k", args.top_k);
        apply_key(file, o_threshold, "word_threshold", args.word_threshold);
        apply_key(file, o_backend, "backend", args.backend);
        apply_key(file, o_model, "model", args.model);
        apply_key(file, o_store, "store", args.store_root);
        apply_key(file, o_out, "out", args.out_dir);
        apply_key(file, o_run_id, "run_id", args.run_id);
        apply_key(file, o_par, "parallelism", args.parallelism);
        apply_key(file, o_resume, "resume", args.resume);
        apply_key(file, o_temp, "temperature", args.temperature);
        apply_key(file, o_syn, "synonyms", args.synonyms);
      }
      return cmd_run(args);
    }
    if (compare->parsed()) return cmd_compare(compare_dirs);
    if (taxonomy->parsed()) return cmd_taxonomy(taxonomy_dir, taxonomy_out);
    if (exp->parsed()) return cmd_export_cache(cache_store, cache_archive);
    if (imp->parsed()) return cmd_import_cache(import_store_flag, import_archive);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
