#include "e2g/report.hpp"

#include <algorithm>
#include <unordered_map>

#include "e2g/errors.hpp"
#include "e2g/extract.hpp"

namespace e2g {

ScoreRow score_outcome(const Instance& instance, const RunOutcome& outcome) {
  ScoreRow row;
  row.id = instance.id;
  row.em = exact_match(outcome.final.text, instance.gold_answers);
  row.f1 = token_f1(outcome.final.text, instance.gold_answers);
  row.unmappable = outcome.unmappable;

  const AnswerForm form = instance.task.answer_form;
  bool label_task = form == AnswerForm::class_label || form == AnswerForm::yes_no ||
                    form == AnswerForm::option_choice;
  if (label_task) {
    auto gold = gold_label(instance);
    row.acc = gold ? accuracy(outcome.final.label, *gold) : 0;
  }
  return row;
}

std::vector<InstanceReport> analyze(const Dataset& dataset,
                                    const std::vector<RunOutcome>& outcomes,
                                    const AnalysisOptions& options) {
  std::unordered_map<std::string, const Instance*> by_id;
  for (const auto& instance : dataset.instances) by_id.emplace(instance.id, &instance);

  std::vector<InstanceReport> reports(outcomes.size());

  // grounding runs through the batch kernel; collect the pairs first
  std::vector<std::string> evidences;
  std::vector<std::string> contexts;
  std::vector<std::size_t> slots;

  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const RunOutcome& outcome = outcomes[i];
    auto it = by_id.find(outcome.instance_id);
    if (it == by_id.end())
      throw Error("outcome for unknown instance '" + outcome.instance_id + "'");
    const Instance& instance = *it->second;

    InstanceReport& report = reports[i];
    report.instance_id = outcome.instance_id;
    report.score = score_outcome(instance, outcome);
    report.qtype = question_type(instance);
    report.retrieval_recall = instance.retrieval_recall;
    report.calls = outcome.calls;
    report.latency_ms_total = outcome.latency_ms_total;
    report.cost_total = outcome.cost_total;
    report.unmappable = outcome.unmappable;

    if (outcome.e_step && !outcome.e_step->evidence.empty()) {
      std::string context;
      for (const auto& doc : instance.context_docs) {
        if (!context.empty()) context += "\n\n";
        context += doc;
      }
      if (!context.empty()) {
        evidences.push_back(outcome.e_step->evidence);
        contexts.push_back(std::move(context));
        slots.push_back(i);
      }
    }
  }

  std::vector<GroundingReport> grounding =
      grounding_score_batch(evidences, contexts, options.fuzz_threshold);
  for (std::size_t k = 0; k < slots.size(); ++k)
    reports[slots[k]].grounded_fraction = grounding[k].grounded_fraction;

  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const RunOutcome& outcome = outcomes[i];
    const Instance& instance = *by_id.at(outcome.instance_id);
    if (scored_correct(instance, outcome.final)) continue;
    std::string reasoning;
    if (outcome.e_step)
      reasoning = outcome.e_step->evidence.empty() ? outcome.e_step->raw
                                                   : outcome.e_step->evidence;
    reports[i].error_kind = classify_error(instance, reasoning, outcome.final,
                                           options.fuzz_threshold, options.grounded_min);
  }
  return reports;
}

std::vector<std::size_t> fraction_histogram(const std::vector<double>& values) {
  std::vector<std::size_t> bins(10, 0);
  for (double v : values) {
    double clamped = std::clamp(v, 0.0, 1.0);
    std::size_t bin = std::min<std::size_t>(static_cast<std::size_t>(clamped * 10.0), 9);
    ++bins[bin];
  }
  return bins;
}

nlohmann::json build_report_body(const Dataset& dataset, const TaskKind& task,
                                 const std::vector<RunOutcome>& outcomes,
                                 const std::vector<InstanceReport>& reports,
                                 const std::vector<InstanceFailure>& failures) {
  if (outcomes.size() != reports.size()) throw Error("outcomes/reports size mismatch");

  std::vector<ScoreRow> rows;
  rows.reserve(reports.size());
  double cost_total = 0.0;
  std::int64_t latency_total = 0;
  std::int64_t calls_total = 0;
  std::int64_t prompt_tokens = 0;
  std::int64_t output_tokens = 0;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    rows.push_back(reports[i].score);
    cost_total += outcomes[i].cost_total;
    latency_total += outcomes[i].latency_ms_total;
    calls_total += outcomes[i].calls;
    for (const auto& rec : outcomes[i].call_records) {
      prompt_tokens += rec.prompt_tokens;
      output_tokens += rec.output_tokens;
    }
  }
  ScoreReport agg = aggregate(rows, cost_total, latency_total);

  nlohmann::json metrics = nlohmann::json::object();
  for (const auto& metric : task.metric_set) {
    if (metric == "em" && agg.em_pct) metrics["em"] = *agg.em_pct;
    if (metric == "f1" && agg.f1_pct) metrics["f1"] = *agg.f1_pct;
    if (metric == "acc" && agg.acc_pct) metrics["accuracy"] = *agg.acc_pct;
  }

  std::vector<double> fractions;
  for (const auto& report : reports)
    if (report.grounded_fraction) fractions.push_back(*report.grounded_fraction);
  nlohmann::json grounding = nlohmann::json::object();
  grounding["analyzed"] = fractions.size();
  if (!fractions.empty()) {
    double sum = 0.0;
    for (double v : fractions) sum += v;
    grounding["mean_fraction"] = sum / static_cast<double>(fractions.size());
  } else {
    grounding["mean_fraction"] = nullptr;
  }
  grounding["histogram"] = fraction_histogram(fractions);

  std::vector<ClassifiedError> errors;
  for (const auto& report : reports)
    if (report.error_kind) errors.push_back({*report.error_kind, report.qtype});
  TaxonomySummary taxonomy = taxonomy_summary(errors);
  nlohmann::json taxonomy_rows = nlohmann::json::array();
  for (const auto& row : taxonomy.rows) {
    taxonomy_rows.push_back({{"category", to_string(row.kind)},
                             {"count", row.count},
                             {"pct", row.pct},
                             {"wh", row.wh_count},
                             {"yes_no", row.yes_no_count},
                             {"other", row.other_count}});
  }

  nlohmann::json failure_rows = nlohmann::json::array();
  for (const auto& failure : failures)
    failure_rows.push_back({{"instance_id", failure.instance_id}, {"error", failure.error}});

  std::size_t unmappable = 0;
  for (const auto& report : reports)
    if (report.unmappable) ++unmappable;

  return nlohmann::json{
      {"task", to_string(task.name)},
      {"counts",
       {{"instances", dataset.instances.size()},
        {"succeeded", outcomes.size()},
        {"failed", failures.size()},
        {"unmappable", unmappable}}},
      {"metrics", metrics},
      {"totals",
       {{"cost", cost_total},
        {"latency_ms", latency_total},
        {"calls", calls_total},
        {"prompt_tokens", prompt_tokens},
        {"output_tokens", output_tokens}}},
      {"grounding", grounding},
      {"taxonomy",
       {{"total_errors", taxonomy.total},
        {"rows", taxonomy_rows},
        // flips are detected by an automatic stance rule, not hand labeling
        {"method", "automatic; yes-no-flip = first reasoning stance vs emitted verdict"}}},
      {"failures", failure_rows},
  };
}

nlohmann::json outcome_row(const RunOutcome& outcome, const InstanceReport& report) {
  nlohmann::json row = to_json(outcome);
  nlohmann::json score{{"em", report.score.em}, {"f1", report.score.f1}};
  score["acc"] = report.score.acc ? nlohmann::json(*report.score.acc) : nlohmann::json(nullptr);
  row["score"] = std::move(score);
  row["grounded_fraction"] = report.grounded_fraction
                                 ? nlohmann::json(*report.grounded_fraction)
                                 : nlohmann::json(nullptr);
  row["error_kind"] =
      report.error_kind ? nlohmann::json(to_string(*report.error_kind)) : nlohmann::json(nullptr);
  row["question_type"] = to_string(report.qtype);
  row["retrieval_recall"] = report.retrieval_recall ? nlohmann::json(*report.retrieval_recall)
                                                    : nlohmann::json(nullptr);
  return row;
}

}  // namespace e2g
