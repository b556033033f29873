#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "e2g/errors.hpp"
#include "e2g/grounding.hpp"
#include "helpers.hpp"

using namespace e2g;
using e2g::test::make_instance;

namespace {

const std::string kContext =
    "The old mill was built in 1884 on the north bank of the river. "
    "It ground wheat for the valley towns until the flood of 1931. "
    "After the flood, the mill was converted into a small museum. "
    "The museum now holds about four thousand visitors each year.";

}  // namespace

TEST_CASE("split_sentences breaks on terminal punctuation") {
  auto s = split_sentences("One. Two! Three? Four");
  REQUIRE(s.size() == 4);
  CHECK(s[0] == "One.");
  CHECK(s[1] == "Two!");
  CHECK(s[2] == "Three?");
  CHECK(s[3] == "Four");

  CHECK(split_sentences("").empty());
  CHECK(split_sentences("   ").empty());
  CHECK(split_sentences("No terminal").size() == 1);
  // decimal points and tight abbreviations do not split
  auto t = split_sentences("Pi is 3.14 roughly. The U.S.A is big.");
  REQUIRE(t.size() == 2);
  CHECK(t[0] == "Pi is 3.14 roughly.");
  // runs of terminals close one sentence
  auto u = split_sentences("Really?! Sure.");
  REQUIRE(u.size() == 2);
  CHECK(u[0] == "Really?!");
}

TEST_CASE("verbatim evidence sentences all match exactly") {
  std::string evidence =
      "It ground wheat for the valley towns until the flood of 1931. "
      "After the flood, the mill was converted into a small museum.";
  GroundingReport report = grounding_score(evidence, kContext);
  CHECK(report.sentence_count == 2);
  CHECK(report.matched_count == 2);
  CHECK(report.grounded_fraction == doctest::Approx(1.0));
  REQUIRE(report.matched_spans.size() == 2);
  CHECK(report.matched_spans[0].score == doctest::Approx(1.0));
  CHECK(report.matched_spans[0].sentence_index == 0);
  CHECK(report.matched_spans[1].sentence_index == 1);
  CHECK(report.matched_spans[0].begin < report.matched_spans[0].end);
}

TEST_CASE("fabricated evidence does not match") {
  GroundingReport report =
      grounding_score("The mill was owned by a famous astronaut from Mars.", kContext);
  CHECK(report.sentence_count == 1);
  CHECK(report.matched_count == 0);
  CHECK(report.grounded_fraction == doctest::Approx(0.0));
  CHECK(report.matched_spans.empty());
}

TEST_CASE("near-verbatim paraphrase passes the fuzzy gate") {
  // one substitution in a long sentence keeps the LCS ratio high
  std::string evidence = "The old mill was built in 1884 on the south bank of the river.";
  GroundingReport strict = grounding_score(evidence, kContext, 0.99);
  CHECK(strict.matched_count == 0);
  GroundingReport loose = grounding_score(evidence, kContext, 0.8);
  CHECK(loose.matched_count == 1);
  REQUIRE(loose.matched_spans.size() == 1);
  CHECK(loose.matched_spans[0].score > 0.8);
  CHECK(loose.matched_spans[0].score < 1.0);
}

TEST_CASE("mixed evidence yields a fraction") {
  std::string evidence =
      "The old mill was built in 1884 on the north bank of the river. "
      "It was famous for its blue sails across the ocean.";
  GroundingReport report = grounding_score(evidence, kContext);
  CHECK(report.sentence_count == 2);
  CHECK(report.matched_count == 1);
  CHECK(report.grounded_fraction == doctest::Approx(0.5));
}

TEST_CASE("empty evidence scores zero and empty context throws") {
  GroundingReport report = grounding_score("", kContext);
  CHECK(report.sentence_count == 0);
  CHECK(report.grounded_fraction == doctest::Approx(0.0));
  CHECK_THROWS_AS(grounding_score("Some claim.", ""), Error);
  CHECK_THROWS_AS(grounding_score("Some claim.", "   "), Error);
}

TEST_CASE("batch kernel equals the serial reference") {
  std::vector<std::string> evidences;
  std::vector<std::string> contexts;
  for (int i = 0; i < 64; ++i) {
    std::string extra = "Extra sentence number " + std::to_string(i) + " lives here. ";
    evidences.push_back(i % 3 == 0
                            ? "After the flood, the mill was converted into a small museum."
                            : extra + "The moon is made of green cheese according to nobody.");
    contexts.push_back(kContext + " " + extra);
  }
  auto serial = grounding_score_batch_serial(evidences, contexts, 0.8);
  auto parallel = grounding_score_batch(evidences, contexts, 0.8);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) CHECK(serial[i] == parallel[i]);

  CHECK_THROWS_AS(grounding_score_batch(evidences, {kContext}, 0.8), Error);
}

TEST_CASE("question_type buckets instances") {
  CHECK(question_type(make_instance("a", TaskName::multihop_qa, "Where is the mill?", {"d"},
                                    {"north bank"})) == QuestionType::wh);
  CHECK(question_type(make_instance("b", TaskName::multihop_qa, "Did the mill survive?", {"d"},
                                    {"yes"})) == QuestionType::yes_no);
  CHECK(question_type(make_instance("c", TaskName::multihop_qa, "Name the river.", {"d"},
                                    {"Dane"})) == QuestionType::other);
  // wh beats nothing when golds are yes/no: answer type wins
  CHECK(question_type(make_instance("d", TaskName::multihop_qa,
                                    "Which bank flooded, if any?", {"d"}, {"no"})) ==
        QuestionType::yes_no);
}

TEST_CASE("classify_error refuses correct instances") {
  Instance inst = make_instance("ok", TaskName::multihop_qa, "Where?", {kContext}, {"museum"});
  CHECK_THROWS_AS(classify_error(inst, "whatever", FinalAnswer{"museum", std::nullopt}), Error);
}

TEST_CASE("classify_error applies the precedence ladder") {
  // yes/no flip: reasoning says yes, answer says no
  Instance flip = make_instance("flip", TaskName::multihop_qa, "Did the flood close the mill?",
                                {kContext}, {"yes"});
  CHECK(classify_error(flip,
                       "Yes, the flood of 1931 ended milling. It ground wheat for the valley "
                       "towns until the flood of 1931.",
                       FinalAnswer{"no", "no"}) == ErrorKind::yes_no_flip);

  // the gold span shows up in the reasoning but not the answer
  Instance span = make_instance("span", TaskName::multihop_qa, "What is the mill now?",
                                {kContext}, {"a small museum"});
  CHECK(classify_error(span,
                       "After the flood, the mill was converted into a small museum.",
                       FinalAnswer{"a granary", std::nullopt}) ==
        ErrorKind::answer_span_in_reasoning);

  // fabricated reasoning: nothing grounded
  Instance wild = make_instance("wild", TaskName::multihop_qa, "What is the mill now?",
                                {kContext}, {"a small museum"});
  CHECK(classify_error(wild,
                       "The mill is now a rocket factory. It exports engines to three planets.",
                       FinalAnswer{"a rocket factory", std::nullopt}) ==
        ErrorKind::ungrounded_hypothesis);

  // grounded, no span, no flip: other
  Instance other = make_instance("other", TaskName::multihop_qa, "When was the mill built?",
                                 {kContext}, {"1884"});
  CHECK(classify_error(other,
                       "The museum now holds about four thousand visitors each year.",
                       FinalAnswer{"1931", std::nullopt}) == ErrorKind::other);

  // flip outranks a span hit
  Instance both = make_instance("both", TaskName::multihop_qa, "Did it become a museum?",
                                {kContext}, {"yes"});
  CHECK(classify_error(both,
                       "Yes. After the flood, the mill was converted into a small museum.",
                       FinalAnswer{"no", "no"}) == ErrorKind::yes_no_flip);
}

TEST_CASE("taxonomy summary counts by category and question type") {
  std::vector<ClassifiedError> errors = {
      {ErrorKind::yes_no_flip, QuestionType::yes_no},
      {ErrorKind::yes_no_flip, QuestionType::yes_no},
      {ErrorKind::answer_span_in_reasoning, QuestionType::wh},
      {ErrorKind::ungrounded_hypothesis, QuestionType::wh},
      {ErrorKind::ungrounded_hypothesis, QuestionType::other},
      {ErrorKind::other, QuestionType::wh},
  };
  TaxonomySummary summary = taxonomy_summary(errors);
  CHECK(summary.total == 6);
  REQUIRE(summary.rows.size() == 4);
  CHECK(summary.rows[0].kind == ErrorKind::yes_no_flip);
  CHECK(summary.rows[0].count == 2);
  CHECK(summary.rows[0].yes_no_count == 2);
  CHECK(summary.rows[0].pct == doctest::Approx(100.0 * 2 / 6));
  CHECK(summary.rows[1].kind == ErrorKind::answer_span_in_reasoning);
  CHECK(summary.rows[1].wh_count == 1);
  CHECK(summary.rows[2].count == 2);
  CHECK(summary.rows[3].count == 1);

  TaxonomySummary empty = taxonomy_summary({});
  CHECK(empty.total == 0);
  for (const auto& row : empty.rows) {
    CHECK(row.count == 0);
    CHECK(row.pct == doctest::Approx(0.0));
  }
}

TEST_CASE("error kind names round-trip") {
  for (ErrorKind kind : {ErrorKind::yes_no_flip, ErrorKind::answer_span_in_reasoning,
                         ErrorKind::ungrounded_hypothesis, ErrorKind::other}) {
    CHECK(error_kind_from_string(to_string(kind)) == kind);
  }
  CHECK_THROWS_AS(error_kind_from_string("novel"), ParseError);
}
