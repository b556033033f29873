#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "e2g/errors.hpp"
#include "e2g/task.hpp"
#include "helpers.hpp"

using namespace e2g;
using e2g::test::TempDir;
using e2g::test::write_file;

TEST_CASE("task registry pins answer forms and metrics") {
  CHECK(task_kind(TaskName::logical_mrc).answer_form == AnswerForm::option_choice);
  CHECK(task_kind(TaskName::logical_mrc).metric_set == std::vector<std::string>{"acc"});
  CHECK(task_kind(TaskName::arithmetic_mrc).answer_form == AnswerForm::short_span);
  CHECK(task_kind(TaskName::multihop_qa).metric_set == std::vector<std::string>{"em", "f1"});
  CHECK(task_kind(TaskName::fact_verification).class_labels ==
        std::vector<std::string>{"SUPPORTS", "REFUTES"});
  CHECK(task_kind(TaskName::dialogue).answer_form == AnswerForm::free_text);
  CHECK(task_kind(TaskName::long_form_qa).metric_set == std::vector<std::string>{"f1"});
  CHECK(task_kind_from_string("open-qa").name == TaskName::open_qa);
  CHECK_THROWS_AS(task_kind_from_string("poetry"), ConfigError);
}

TEST_CASE("benchmark table holds the eight collections") {
  CHECK(benchmark_table().size() == 8);
  const BenchmarkDescriptor* hotpot = find_benchmark("hotpotqa");
  REQUIRE(hotpot != nullptr);
  CHECK(hotpot->task == TaskName::multihop_qa);
  CHECK(hotpot->avg_context_words == 1106);
  CHECK(find_benchmark("logiqa")->avg_context_words == 77);
  CHECK(find_benchmark("drop")->avg_context_words == 196);
  CHECK(find_benchmark("DROP")->key == "drop");  // case-insensitive lookup
  CHECK(find_benchmark("tqa")->task == TaskName::open_qa);
  CHECK(find_benchmark("nq")->task == TaskName::open_qa);
  CHECK(find_benchmark("fever")->task == TaskName::fact_verification);
  CHECK(find_benchmark("unknown") == nullptr);
}

TEST_CASE("load_dataset round-trips a well-formed file") {
  TempDir tmp;
  auto path = tmp / "mini.jsonl";
  write_file(path,
             R"({"id":"q1","query":"Who wrote it?","context":["Doc one.","Doc two."],"gold":["Shakespeare"],"recall":0.5})"
             "\n"
             R"({"id":"q2","query":"Where is it?","context":["Doc."],"gold":["Paris","paris"]})"
             "\n");
  Dataset ds = load_dataset(path, task_kind(TaskName::multihop_qa), "dev");
  REQUIRE(ds.instances.size() == 2);
  CHECK(ds.name == "mini");
  CHECK(ds.split == "dev");
  CHECK(ds.instances[0].id == "q1");
  CHECK(ds.instances[0].context_docs.size() == 2);
  CHECK(ds.instances[0].retrieval_recall == 0.5);
  CHECK(ds.instances[1].gold_answers.size() == 2);
  CHECK_FALSE(ds.instances[1].retrieval_recall.has_value());

  auto copy = tmp / "copy.jsonl";
  save_dataset(ds, copy);
  Dataset again = load_dataset(copy, task_kind(TaskName::multihop_qa), "dev");
  CHECK(again.instances == ds.instances);
}

TEST_CASE("load_dataset errors name the line and field") {
  TempDir tmp;

  auto check_error = [&](const std::string& body, const std::string& needle) {
    auto path = tmp / "bad.jsonl";
    write_file(path, body);
    try {
      load_dataset(path, task_kind(TaskName::multihop_qa), "dev");
      FAIL_CHECK("expected ParseError for: " << body);
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };

  check_error("{not json}\n", "bad.jsonl:1");
  check_error(R"({"query":"q","context":["c"],"gold":["g"]})" "\n", "missing field 'id'");
  check_error(R"({"id":"a","context":["c"],"gold":["g"]})" "\n", "missing field 'query'");
  check_error(R"({"id":"a","query":"q","gold":["g"]})" "\n", "missing field 'context'");
  check_error(R"({"id":"a","query":"q","context":[],"gold":["g"]})" "\n", "empty");
  check_error(R"({"id":"a","query":"q","context":["c"]})" "\n", "missing field 'gold'");
  check_error(R"({"id":"a","query":"q","context":["c"],"gold":["g"]})" "\n"
              R"({"id":"a","query":"q","context":["c"],"gold":["g"]})" "\n",
              "duplicate instance id");
  check_error(R"({"id":"a","query":"q","context":[1],"gold":["g"]})" "\n",
              "'context' must hold strings");
}

TEST_CASE("dialogue queries may arrive as turn arrays") {
  TempDir tmp;
  auto path = tmp / "dlg.jsonl";
  write_file(path,
             R"({"id":"d1","query":["Hi there","Hello! How can I help?","Tell me about jazz"],"context":["Jazz is a music genre."],"gold":["Jazz originated in New Orleans."]})"
             "\n");
  Dataset ds = load_dataset(path, task_kind(TaskName::dialogue), "dev");
  REQUIRE(ds.instances.size() == 1);
  CHECK(ds.instances[0].query ==
        "Turn 1: Hi there\nTurn 2: Hello! How can I help?\nTurn 3: Tell me about jazz");
}

TEST_CASE("option records validate gold membership") {
  TempDir tmp;
  auto good = tmp / "opt.jsonl";
  write_file(good,
             R"({"id":"o1","query":"Pick one","context":["c"],"options":["alpha","beta"],"gold":["beta"]})"
             "\n");
  Dataset ds = load_dataset(good, task_kind(TaskName::logical_mrc), "dev");
  REQUIRE(ds.instances[0].options.has_value());
  CHECK(ds.instances[0].options->size() == 2);

  auto bad = tmp / "opt_bad.jsonl";
  write_file(bad,
             R"({"id":"o1","query":"Pick one","context":["c"],"options":["alpha","beta"],"gold":["gamma"]})"
             "\n");
  CHECK_THROWS_AS(load_dataset(bad, task_kind(TaskName::logical_mrc), "dev"), ParseError);

  auto missing = tmp / "opt_missing.jsonl";
  write_file(missing, R"({"id":"o1","query":"Pick one","context":["c"],"gold":["alpha"]})" "\n");
  CHECK_THROWS_AS(load_dataset(missing, task_kind(TaskName::logical_mrc), "dev"), ParseError);

  CHECK_THROWS_AS(load_dataset(tmp / "never_written.jsonl", task_kind(TaskName::logical_mrc)),
                  ConfigError);
}

TEST_CASE("class records accept a label field and validate the label set") {
  TempDir tmp;
  auto path = tmp / "fever.jsonl";
  write_file(path,
             R"({"id":"f1","query":"The sky is blue.","context":["The sky appears blue."],"label":"SUPPORTS"})"
             "\n");
  Dataset ds = load_dataset(path, task_kind(TaskName::fact_verification), "dev");
  CHECK(ds.instances[0].gold_answers == std::vector<std::string>{"SUPPORTS"});

  auto bad = tmp / "fever_bad.jsonl";
  write_file(bad,
             R"({"id":"f1","query":"c","context":["c"],"gold":["MAYBE"]})" "\n");
  CHECK_THROWS_AS(load_dataset(bad, task_kind(TaskName::fact_verification), "dev"), ParseError);
}

TEST_CASE("assemble_context takes the first k docs under headings") {
  Instance inst = e2g::test::make_instance("x", TaskName::multihop_qa, "q",
                                           {"First doc.", "Second doc.", "Third doc."}, {"g"});
  CHECK(assemble_context(inst, 2) ==
        "[Document 1]\nFirst doc.\n\n[Document 2]\nSecond doc.");
  // top_k past the end clamps
  CHECK(assemble_context(inst, 10) ==
        "[Document 1]\nFirst doc.\n\n[Document 2]\nSecond doc.\n\n[Document 3]\nThird doc.");
  CHECK_THROWS_AS(assemble_context(inst, 0), ConfigError);

  Instance empty = inst;
  empty.context_docs.clear();
  CHECK_THROWS_AS(assemble_context(empty, 5), Error);
}

TEST_CASE("context_word_count counts whitespace-delimited words") {
  CHECK(context_word_count("") == 0);
  CHECK(context_word_count("   ") == 0);
  CHECK(context_word_count("one") == 1);
  CHECK(context_word_count("one two\tthree\nfour") == 4);
  Instance inst = e2g::test::make_instance("x", TaskName::multihop_qa, "q",
                                           {"alpha beta", "gamma"}, {"g"});
  CHECK(context_word_count(assemble_context(inst, 2)) == 7);  // includes the two headings
}
