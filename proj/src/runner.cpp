#include "e2g/runner.hpp"

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "e2g/errors.hpp"
#include "e2g/extract.hpp"
#include "e2g/store.hpp"

namespace e2g {

namespace {

bool safe_run_id(const std::string& id) {
  if (id.empty() || id.size() > 64) return false;
  for (char c : id) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
              c == '-' || c == '_' || c == '.';
    if (!ok) return false;
  }
  return id != "." && id != "..";
}

std::string utc_now_iso() {
  std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  out.flush();
  if (!out) throw Error("short write to '" + path.string() + "'");
}

std::string format_double(double v, int precision = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::optional<double> metric_value(const nlohmann::json& report, const char* name) {
  const auto& metrics = report.at("metrics");
  if (!metrics.contains(name) || metrics.at(name).is_null()) return std::nullopt;
  return metrics.at(name).get<double>();
}

}  // namespace

ResolvedRun resolve_run(const RunConfig& config) {
  if (config.dataset_path.empty()) throw ConfigError("no dataset path given");
  if (config.schema.empty()) throw ConfigError("no schema given (benchmark key or task name)");
  if (config.parallelism < 1) throw ConfigError("parallelism must be >= 1");

  ResolvedRun resolved;
  std::size_t avg_words = 0;

  if (const BenchmarkDescriptor* desc = find_benchmark(config.schema)) {
    resolved.task = task_kind(desc->task);
    resolved.benchmark_key = desc->key;
    avg_words = static_cast<std::size_t>(desc->avg_context_words);
  } else {
    try {
      resolved.task = task_kind_from_string(config.schema);
    } catch (const Error&) {
      throw ConfigError("unknown schema '" + config.schema +
                        "': expected a benchmark key or a task name");
    }
  }

  resolved.dataset = load_dataset(config.dataset_path, resolved.task, config.split);
  resolved.dataset_digest = sha256_file(config.dataset_path);

  if (resolved.benchmark_key.empty()) {
    std::size_t total = 0;
    for (const auto& instance : resolved.dataset.instances)
      for (const auto& doc : instance.context_docs) total += context_word_count(doc);
    avg_words = resolved.dataset.instances.empty() ? 0 : total / resolved.dataset.instances.size();
  }

  PipelinePlan plan = default_plan(resolved.task, avg_words, resolved.benchmark_key);
  if (config.word_threshold) {
    if (*config.word_threshold == 0) throw ConfigError("word_threshold must be >= 1");
    plan.word_threshold = *config.word_threshold;
    plan.two_step = avg_words > plan.word_threshold;
  }
  if (config.strategy) plan.strategy = *config.strategy;
  if (config.g_policy) plan.g_policy = *config.g_policy;
  if (config.top_k) plan.top_k = *config.top_k;
  if (config.two_step) plan.two_step = *config.two_step;

  if (plan.top_k < 1) throw ConfigError("top_k must be >= 1");
  if (plan.two_step && strategy(plan.strategy).steps < 2)
    throw ConfigError("strategy '" + std::string(to_string(plan.strategy)) +
                      "' cannot run two steps");
  resolved.plan = plan;

  RunnerOptions options;
  options.model_id = config.model_id;
  options.temperature = config.temperature;
  options.cost_model = config.cost_model;
  if (config.synonyms_path) options.synonyms = SynonymTable::load(*config.synonyms_path);
  resolved.options = std::move(options);

  if (config.run_id) {
    if (!safe_run_id(*config.run_id))
      throw ConfigError("run id must be a short filesystem-safe token");
    resolved.run_id = *config.run_id;
  } else {
    std::string seed = "run\n" + resolved.dataset_digest + "\n" + to_json(plan).dump() + "\n" +
                       config.backend_mode + "\n" + config.model_id;
    resolved.run_id = sha256_hex(seed).substr(0, 12);
  }
  return resolved;
}

std::unique_ptr<CompletionBackend> make_backend(const RunConfig& config) {
  if (config.backend_mode == "replay") {
    return std::make_unique<ReplayBackend>(TranscriptStore(config.store_root));
  }
  if (config.backend_mode == "record") {
    auto live = std::make_shared<HttpBackend>(HttpBackendConfig::from_env());
    return std::make_unique<ReplayBackend>(TranscriptStore(config.store_root), std::move(live));
  }
  if (config.backend_mode == "live") {
    return std::make_unique<HttpBackend>(HttpBackendConfig::from_env());
  }
  throw ConfigError("unknown backend mode '" + config.backend_mode +
                    "' (expected replay, record or live)");
}

RunRecord execute_run(const RunConfig& config, CompletionBackend& backend) {
  ResolvedRun resolved = resolve_run(config);

  std::filesystem::path dir = config.out_dir / resolved.run_id;
  std::filesystem::create_directories(dir);
  std::filesystem::path state = dir / "state";
  if (!config.resume) {
    std::error_code ec;
    std::filesystem::remove_all(state, ec);
  }

  const std::string started = utc_now_iso();
  DatasetRunResult result = run_dataset(resolved.dataset, resolved.plan, backend,
                                        resolved.options, config.parallelism, state);
  std::vector<InstanceReport> reports = analyze(resolved.dataset, result.outcomes,
                                                config.analysis);

  nlohmann::json report = build_report_body(resolved.dataset, resolved.task, result.outcomes,
                                            reports, result.failures);
  report["run_id"] = resolved.run_id;
  report["schema"] = config.schema;
  report["benchmark"] = resolved.benchmark_key.empty()
                            ? nlohmann::json(nullptr)
                            : nlohmann::json(resolved.benchmark_key);
  report["dataset"] = {{"name", resolved.dataset.name},
                       {"digest", resolved.dataset_digest},
                       {"size", resolved.dataset.instances.size()},
                       {"split", resolved.dataset.split},
                       {"source", resolved.dataset.source_path}};
  report["plan"] = to_json(resolved.plan);
  report["backend_mode"] = config.backend_mode;
  report["model"] = config.model_id;

  std::ostringstream outcomes_text;
  for (std::size_t i = 0; i < result.outcomes.size(); ++i)
    outcomes_text << outcome_row(result.outcomes[i], reports[i]).dump() << "\n";

  nlohmann::json meta{{"started_utc", started},
                      {"finished_utc", utc_now_iso()},
                      {"backend", backend.describe()},
                      {"parallelism", config.parallelism},
                      {"resume", config.resume},
                      {"store_root", config.store_root.string()}};

  write_text(dir / "report.json", report.dump(2) + "\n");
  write_text(dir / "outcomes.jsonl", outcomes_text.str());
  write_text(dir / "meta.json", meta.dump(2) + "\n");

  return RunRecord{resolved.run_id, dir, std::move(report)};
}

nlohmann::json load_report(const std::filesystem::path& run_dir) {
  std::filesystem::path path = run_dir / "report.json";
  std::ifstream in(path);
  if (!in) throw ConfigError("no report at '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("unparseable report '" + path.string() + "': " + e.what());
  }
}

CompareResult compare_runs(const std::vector<std::filesystem::path>& run_dirs) {
  if (run_dirs.size() < 2) throw ConfigError("compare needs at least two runs");

  CompareResult result;
  for (const auto& dir : run_dirs) result.reports.push_back(load_report(dir));

  const std::string digest = result.reports.front().at("dataset").at("digest");
  for (const auto& report : result.reports) {
    if (report.at("dataset").at("digest") != digest)
      throw ConfigError("runs evaluated different datasets; refusing to compare");
  }

  std::ostringstream out;
  out << pad("run", 14) << pad("strategy", 10) << pad("steps", 7) << pad("g-policy", 23)
      << pad("em", 8) << pad("f1", 8) << pad("acc", 8) << pad("cost", 10) << pad("latency", 10)
      << "calls\n";
  for (const auto& report : result.reports) {
    const auto& plan = report.at("plan");
    auto metric_cell = [&](const char* name) {
      auto v = metric_value(report, name);
      return pad(v ? format_double(*v) : "-", 8);
    };
    out << pad(report.at("run_id").get<std::string>(), 14)
        << pad(plan.at("strategy").get<std::string>(), 10)
        << pad(plan.at("two_step").get<bool>() ? "2" : "1", 7)
        << pad(plan.at("g_policy").get<std::string>(), 23) << metric_cell("em")
        << metric_cell("f1") << metric_cell("accuracy")
        << pad(format_double(report.at("totals").at("cost").get<double>(), 4), 10)
        << pad(std::to_string(report.at("totals").at("latency_ms").get<std::int64_t>()), 10)
        << report.at("totals").at("calls").get<std::int64_t>() << "\n";
  }

  const nlohmann::json& base = result.reports.front();
  for (std::size_t i = 1; i < result.reports.size(); ++i) {
    const nlohmann::json& other = result.reports[i];
    std::ostringstream delta;
    for (const char* name : {"em", "f1", "accuracy"}) {
      auto a = metric_value(base, name);
      auto b = metric_value(other, name);
      if (!a || !b) continue;
      double d = *b - *a;
      if (!delta.str().empty()) delta << ", ";
      delta << name << " " << (d >= 0 ? "+" : "") << format_double(d);
    }
    if (!delta.str().empty())
      out << other.at("run_id").get<std::string>() << " vs "
          << base.at("run_id").get<std::string>() << ": " << delta.str() << "\n";
  }

  result.rendered = out.str();
  return result;
}

TaxonomyFiles write_taxonomy_files(const std::filesystem::path& run_dir,
                                   const std::filesystem::path& out_dir) {
  nlohmann::json report = load_report(run_dir);
  std::filesystem::create_directories(out_dir);

  TaxonomyFiles files;
  files.taxonomy_tsv = out_dir / "taxonomy.tsv";
  files.grounding_hist_tsv = out_dir / "grounding_hist.tsv";
  files.recall_vs_f1_tsv = out_dir / "recall_vs_f1.tsv";

  {
    std::ostringstream tsv;
    tsv << "category\tcount\tpct\twh\tyes_no\tother\n";
    for (const auto& row : report.at("taxonomy").at("rows")) {
      tsv << row.at("category").get<std::string>() << "\t" << row.at("count").get<std::size_t>()
          << "\t" << format_double(row.at("pct").get<double>(), 4) << "\t"
          << row.at("wh").get<std::size_t>() << "\t" << row.at("yes_no").get<std::size_t>()
          << "\t" << row.at("other").get<std::size_t>() << "\n";
    }
    write_text(files.taxonomy_tsv, tsv.str());
  }

  {
    std::ostringstream tsv;
    tsv << "bin_low\tbin_high\tcount\n";
    const auto& hist = report.at("grounding").at("histogram");
    for (std::size_t i = 0; i < hist.size(); ++i) {
      tsv << format_double(static_cast<double>(i) / 10.0, 1) << "\t"
          << format_double(static_cast<double>(i + 1) / 10.0, 1) << "\t"
          << hist[i].get<std::size_t>() << "\n";
    }
    write_text(files.grounding_hist_tsv, tsv.str());
  }

  {
    std::filesystem::path outcomes_path = run_dir / "outcomes.jsonl";
    std::ifstream in(outcomes_path);
    if (!in) throw ConfigError("no outcomes at '" + outcomes_path.string() + "'");
    std::vector<double> sum_f1(10, 0.0);
    std::vector<std::size_t> count(10, 0);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      nlohmann::json row = nlohmann::json::parse(line);
      if (row.at("retrieval_recall").is_null()) continue;
      double recall = row.at("retrieval_recall").get<double>();
      double f1 = row.at("score").at("f1").get<double>();
      std::size_t bin = std::min<std::size_t>(
          static_cast<std::size_t>(std::clamp(recall, 0.0, 1.0) * 10.0), 9);
      sum_f1[bin] += f1;
      ++count[bin];
      files.has_recall = true;
    }
    std::ostringstream tsv;
    tsv << "recall_bin_low\trecall_bin_high\tcount\tmean_f1\n";
    for (std::size_t i = 0; i < 10; ++i) {
      tsv << format_double(static_cast<double>(i) / 10.0, 1) << "\t"
          << format_double(static_cast<double>(i + 1) / 10.0, 1) << "\t" << count[i] << "\t"
          << (count[i] == 0 ? "-" : format_double(sum_f1[i] / static_cast<double>(count[i]), 4))
          << "\n";
    }
    write_text(files.recall_vs_f1_tsv, tsv.str());
  }

  return files;
}

}  // namespace e2g
