#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "e2g/errors.hpp"
#include "e2g/prompt.hpp"
#include "helpers.hpp"

using namespace e2g;
using e2g::test::make_instance;

TEST_CASE("strategy registry pins instruction lines and step counts") {
  CHECK(strategy(StrategyName::cot).instruction_line == "Think step-by-step");
  CHECK(strategy(StrategyName::cot).steps == 1);
  CHECK(strategy(StrategyName::e2g_base).instruction_line ==
        "Generate the answer with evidence and explanation");
  CHECK(strategy(StrategyName::e2g_base).steps == 2);
  CHECK(strategy(StrategyName::e2g_pro).instruction_line ==
        "Think step by step with evidence and explanation. Generate both answer and "
        "step-by-step-reasoning-with-evidence-and-explanation");
  CHECK(strategy(StrategyName::e2g_pro).steps == 2);
  CHECK(strategy_name_from_string("e2g-base") == StrategyName::e2g_base);
  CHECK_THROWS_AS(strategy_name_from_string("zero-shot"), ConfigError);
}

TEST_CASE("agent instruction renders the task roles") {
  AgentInstruction fact = build_agent_instruction(task_kind(TaskName::fact_verification));
  CHECK(fact.rendered ==
        "You are a text classification agent. Given a context and a claim, please give a "
        "judgement to the claim ('SUPPORTS' or 'REFUTES') based on the context.");

  AgentInstruction arith = build_agent_instruction(task_kind(TaskName::arithmetic_mrc));
  CHECK(arith.rendered ==
        "You are an arithmetic reasoning agent. Given a context and a question, please give "
        "an answer based on the context.");

  AgentInstruction open = build_agent_instruction(task_kind(TaskName::open_qa));
  CHECK(open.rendered.find("a short answer (less than five tokens)") != std::string::npos);

  AgentInstruction dlg = build_agent_instruction(task_kind(TaskName::dialogue));
  CHECK(dlg.rendered.find("a previous dialogue") != std::string::npos);
  CHECK(dlg.rendered.find("a next turn dialogue") != std::string::npos);
}

TEST_CASE("step prompts stack instruction, strategy, context and query") {
  Instance inst = make_instance("p1", TaskName::multihop_qa, "Who founded the town?",
                                {"The town was founded by Ada."}, {"Ada"});
  const Strategy& base = strategy(StrategyName::e2g_base);
  PromptBundle e = build_step_prompt(inst, base, Step::e, "CTX");

  CHECK(e.full_text ==
        "# You are a question answering agent. Given a context and a question, please give "
        "an answer based on the context.\n"
        "# Generate the answer with evidence and explanation\n"
        "# Label the answer line \"Answer:\" and the rationale \"Evidence and explanation:\".\n"
        "# Context:\nCTX\n"
        "# Question: Who founded the town?");
  CHECK(e.approx_tokens == estimate_tokens(e.full_text));

  // same instance, same strategy: the two steps differ only in context
  PromptBundle g = build_step_prompt(inst, base, Step::g, "EVIDENCE");
  CHECK(g.agent_instruction == e.agent_instruction);
  CHECK(g.query_block == e.query_block);
  CHECK(g.full_text.find("EVIDENCE") != std::string::npos);
  CHECK(g.full_text.find("CTX") == std::string::npos);
}

TEST_CASE("cot prompts omit the section format line") {
  Instance inst = make_instance("p2", TaskName::multihop_qa, "q?", {"doc"}, {"g"});
  PromptBundle cot = build_step_prompt(inst, strategy(StrategyName::cot), Step::single, "CTX");
  CHECK(cot.full_text.find("Think step-by-step") != std::string::npos);
  CHECK(cot.full_text.find("Label the answer line") == std::string::npos);
}

TEST_CASE("claim tasks use the Claim query label") {
  Instance inst = make_instance("p3", TaskName::fact_verification, "The sky is green.",
                                {"The sky is blue."}, {"REFUTES"});
  PromptBundle e = build_step_prompt(inst, strategy(StrategyName::e2g_base), Step::e, "CTX");
  CHECK(e.query_block == "# Claim: The sky is green.");
}

TEST_CASE("option tasks append a lettered option list") {
  Instance inst = make_instance("p4", TaskName::logical_mrc, "Pick.", {"doc"}, {"beta"});
  inst.options = std::vector<std::string>{"alpha", "beta", "gamma"};
  PromptBundle e = build_step_prompt(inst, strategy(StrategyName::e2g_pro), Step::e, "CTX");
  CHECK(e.query_block ==
        "# Question: Pick.\n# Options:\nA. alpha\nB. beta\nC. gamma");
}

TEST_CASE("step validity is enforced") {
  Instance inst = make_instance("p5", TaskName::multihop_qa, "q?", {"doc"}, {"g"});
  CHECK_THROWS_AS(build_step_prompt(inst, strategy(StrategyName::cot), Step::g, "CTX"), Error);
  CHECK_THROWS_AS(build_step_prompt(inst, strategy(StrategyName::cot), Step::e, "CTX"), Error);
  CHECK_THROWS_AS(build_step_prompt(inst, strategy(StrategyName::e2g_base), Step::single, "CTX"),
                  Error);
  CHECK_THROWS_AS(build_step_prompt(inst, strategy(StrategyName::e2g_base), Step::e, ""), Error);
}

TEST_CASE("token estimate is ceil of quarter length and monotone") {
  CHECK(estimate_tokens("") == 0);
  CHECK(estimate_tokens("a") == 1);
  CHECK(estimate_tokens("abcd") == 1);
  CHECK(estimate_tokens("abcde") == 2);
  std::string text;
  std::size_t last = 0;
  for (int i = 0; i < 100; ++i) {
    text += "x";
    std::size_t now = estimate_tokens(text);
    CHECK(now >= last);
    last = now;
  }
  CHECK(last == 25);
}
