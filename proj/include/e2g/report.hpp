#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "e2g/grounding.hpp"
#include "e2g/metrics.hpp"
#include "e2g/pipeline.hpp"
#include "e2g/task.hpp"

namespace e2g {

struct AnalysisOptions {
  double fuzz_threshold = 0.8;
  double grounded_min = 0.5;
};

/// Per-instance view joining scores with the grounding analysis.
struct InstanceReport {
  std::string instance_id;
  ScoreRow score;
  std::optional<double> grounded_fraction;  // absent without a rationale
  std::optional<ErrorKind> error_kind;      // set only for incorrect answers
  QuestionType qtype = QuestionType::other;
  std::optional<double> retrieval_recall;
  int calls = 0;
  std::int64_t latency_ms_total = 0;
  double cost_total = 0.0;
  bool unmappable = false;
};

/// EM/F1 against the golds; accuracy additionally for label-style tasks.
ScoreRow score_outcome(const Instance& instance, const RunOutcome& outcome);

/// Scores plus grounding and error-taxonomy analysis for every outcome.
/// Outcomes pair with instances by id; an unknown id is an error. Grounding
/// runs through the parallel batch kernel.
std::vector<InstanceReport> analyze(const Dataset& dataset,
                                    const std::vector<RunOutcome>& outcomes,
                                    const AnalysisOptions& options = {});

/// 10-bin histogram over [0, 1]; the last bin is closed.
std::vector<std::size_t> fraction_histogram(const std::vector<double>& values);

/// Aggregate report body: counts, the task's metrics, totals, grounding
/// summary and the error taxonomy. Deterministic; carries no timestamps.
nlohmann::json build_report_body(const Dataset& dataset, const TaskKind& task,
                                 const std::vector<RunOutcome>& outcomes,
                                 const std::vector<InstanceReport>& reports,
                                 const std::vector<InstanceFailure>& failures);

/// One outcomes.jsonl row: the outcome joined with its analysis fields.
nlohmann::json outcome_row(const RunOutcome& outcome, const InstanceReport& report);

}  // namespace e2g
