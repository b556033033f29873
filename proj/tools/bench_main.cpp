// Times the OpenMP kernels against their serial reference paths and checks
// that both produce identical results: the grounding batch scorer and the
// dataset runner.

#include <chrono>
#include <cstdint>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "e2g/backend.hpp"
#include "e2g/grounding.hpp"
#include "e2g/pipeline.hpp"
#include "e2g/task.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using namespace e2g;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

const std::vector<std::string>& word_pool() {
  static const std::vector<std::string> pool = {
      "river",  "saddle", "lantern", "quarry",  "meadow", "anchor", "barrel", "cinder",
      "draught", "ember",  "furrow",  "gable",   "hollow", "ingot",  "jetty",  "kiln",
      "ledger", "mortar", "nave",    "orchard", "pulley", "quill",  "rafter", "sluice",
      "tether", "upland", "vellum",  "wharf",   "yarrow", "zenith"};
  return pool;
}

std::string sentence(std::mt19937& rng, std::size_t words) {
  const auto& pool = word_pool();
  std::string out;
  for (std::size_t i = 0; i < words; ++i) {
    if (!out.empty()) out += ' ';
    out += pool[rng() % pool.size()];
  }
  out += '.';
  out[0] = static_cast<char>(out[0] - 'a' + 'A');
  return out;
}

class EchoBackend : public CompletionBackend {
 public:
  CompletionResponse complete(const CompletionRequest& request) override {
    CompletionResponse response;
    response.text = "Answer: quarry\nEvidence and explanation: The lantern stood by the quarry.";
    response.prompt_tokens = static_cast<std::int64_t>(estimate_tokens(request.prompt));
    response.output_tokens = 20;
    response.latency_ms = 1;
    return response;
  }
  std::string describe() const override { return "echo"; }
};

int bench_grounding(std::size_t pairs, std::size_t context_sentences) {
  std::mt19937 rng(7);
  std::vector<std::string> evidences(pairs);
  std::vector<std::string> contexts(pairs);
  for (std::size_t i = 0; i < pairs; ++i) {
    std::vector<std::string> ctx_sentences;
    std::string context;
    for (std::size_t s = 0; s < context_sentences; ++s) {
      ctx_sentences.push_back(sentence(rng, 8 + rng() % 8));
      if (!context.empty()) context += ' ';
      context += ctx_sentences.back();
    }
    std::string evidence;
    for (int s = 0; s < 3; ++s) {  // copied: exact path
      evidence += ctx_sentences[rng() % ctx_sentences.size()];
      evidence += ' ';
    }
    for (int s = 0; s < 3; ++s) {  // fabricated: full window scan
      evidence += sentence(rng, 10 + rng() % 6);
      evidence += ' ';
    }
    evidences[i] = std::move(evidence);
    contexts[i] = std::move(context);
  }

  auto t0 = Clock::now();
  auto serial = grounding_score_batch_serial(evidences, contexts, 0.8);
  double serial_s = seconds_since(t0);

  t0 = Clock::now();
  auto parallel = grounding_score_batch(evidences, contexts, 0.8);
  double parallel_s = seconds_since(t0);

  bool identical = serial == parallel;
  std::cout << "grounding batch, " << pairs << " pairs x " << context_sentences
            << " context sentences\n";
  std::cout << "  serial reference " << serial_s << " s\n";
  std::cout << "  openmp batch     " << parallel_s << " s ("
            << (parallel_s > 0 ? serial_s / parallel_s : 0.0) << "x)\n";
  std::cout << "  outputs identical: " << (identical ? "yes" : "NO") << "\n";
  return identical ? 0 : 1;
}

int bench_runner(std::size_t instances, int threads) {
  Dataset dataset;
  dataset.name = "bench";
  std::mt19937 rng(11);
  for (std::size_t i = 0; i < instances; ++i) {
    Instance inst;
    inst.id = "b" + std::to_string(i);
    inst.task = task_kind(TaskName::multihop_qa);
    inst.query = "Where did the lantern stand?";
    for (int d = 0; d < 6; ++d) inst.context_docs.push_back(sentence(rng, 120));
    inst.gold_answers = {"quarry"};
    dataset.instances.push_back(std::move(inst));
  }

  PipelinePlan plan;  // two-step, evidence-only
  RunnerOptions options;
  EchoBackend backend;

  auto t0 = Clock::now();
  DatasetRunResult one = run_dataset(dataset, plan, backend, options, 1);
  double one_s = seconds_since(t0);

  t0 = Clock::now();
  DatasetRunResult many = run_dataset(dataset, plan, backend, options, threads);
  double many_s = seconds_since(t0);

  bool identical = one.outcomes == many.outcomes && one.failures.empty() && many.failures.empty();
  std::cout << "run_dataset, " << instances << " two-step instances\n";
  std::cout << "  parallelism 1    " << one_s << " s\n";
  std::cout << "  parallelism " << threads << "    " << many_s << " s ("
            << (many_s > 0 ? one_s / many_s : 0.0) << "x)\n";
  std::cout << "  outcomes identical: " << (identical ? "yes" : "NO") << "\n";
  return identical ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t pairs = 400;
  std::size_t context_sentences = 40;
  std::size_t instances = 2000;
  int threads = 8;

  CLI::App app{"serial-vs-parallel benchmark for the grounding and runner kernels"};
  app.add_option("--pairs", pairs, "grounding workload size");
  app.add_option("--context-sentences", context_sentences, "sentences per context");
  app.add_option("--instances", instances, "runner workload size");
  app.add_option("--threads", threads, "parallel worker count");
  CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
  std::cout << "openmp enabled, max threads " << omp_get_max_threads() << "\n";
#else
  std::cout << "openmp not available; parallel paths run serially\n";
#endif

  int rc = bench_grounding(pairs, context_sentences);
  rc |= bench_runner(instances, threads);
  return rc;
}
