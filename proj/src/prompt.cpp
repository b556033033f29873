#include "e2g/prompt.hpp"

#include <cctype>

#include "e2g/errors.hpp"

namespace e2g {

namespace {

struct RoleSpec {
  TaskName task;
  std::string_view task_label;
  std::string_view input_role;
  std::string_view output_role;
  std::string_view query_label;
};

constexpr RoleSpec kRoles[] = {
    {TaskName::logical_mrc, "logical reasoning", "question",
     "answer choosing one of the given options", "Question"},
    {TaskName::arithmetic_mrc, "arithmetic reasoning", "question", "answer", "Question"},
    {TaskName::multihop_qa, "question answering", "question", "answer", "Question"},
    {TaskName::open_qa, "question answering", "question",
     "short answer (less than five tokens)", "Question"},
    {TaskName::fact_verification, "text classification", "claim",
     "judgement to the claim ('SUPPORTS' or 'REFUTES')", "Claim"},
    {TaskName::dialogue, "dialogue generation", "previous dialogue", "next turn dialogue",
     "Previous dialogue"},
    {TaskName::long_form_qa, "question answering", "question", "detailed answer", "Question"},
};

const RoleSpec& role_spec(TaskName task) {
  for (const auto& r : kRoles) {
    if (r.task == task) return r;
  }
  throw ConfigError("task has no registered agent roles: " + std::string(to_string(task)));
}

std::string_view article_for(std::string_view phrase) {
  if (phrase.empty()) return "a";
  switch (std::tolower(static_cast<unsigned char>(phrase.front()))) {
    case 'a': case 'e': case 'i': case 'o': case 'u': return "an";
    default: return "a";
  }
}

std::string with_article(std::string_view phrase) {
  std::string out{article_for(phrase)};
  out += " ";
  out += phrase;
  return out;
}

// Asks the model for the two labeled sections the extraction stage parses.
constexpr std::string_view kSectionFormatLine =
    "Label the answer line \"Answer:\" and the rationale \"Evidence and explanation:\".";

std::string option_key(std::size_t index) {
  if (index >= 26) throw ConfigError("more than 26 answer options are not supported");
  return std::string(1, static_cast<char>('A' + index));
}

}  // namespace

std::string_view to_string(StrategyName name) {
  switch (name) {
    case StrategyName::cot: return "cot";
    case StrategyName::e2g_base: return "e2g-base";
    case StrategyName::e2g_pro: return "e2g-pro";
  }
  return "unknown";
}

std::string_view to_string(Step step) {
  switch (step) {
    case Step::e: return "E";
    case Step::g: return "G";
    case Step::single: return "single";
  }
  return "unknown";
}

StrategyName strategy_name_from_string(std::string_view s) {
  for (StrategyName n : {StrategyName::cot, StrategyName::e2g_base, StrategyName::e2g_pro}) {
    if (to_string(n) == s) return n;
  }
  throw ConfigError("unknown strategy: " + std::string(s));
}

const Strategy& strategy(StrategyName name) {
  static const Strategy cot{StrategyName::cot, "Think step-by-step", 1};
  static const Strategy base{StrategyName::e2g_base,
                             "Generate the answer with evidence and explanation", 2};
  static const Strategy pro{
      StrategyName::e2g_pro,
      "Think step by step with evidence and explanation. Generate both answer and "
      "step-by-step-reasoning-with-evidence-and-explanation",
      2};
  switch (name) {
    case StrategyName::cot: return cot;
    case StrategyName::e2g_base: return base;
    case StrategyName::e2g_pro: return pro;
  }
  throw ConfigError("unknown strategy");
}

AgentInstruction build_agent_instruction(const TaskKind& task) {
  const RoleSpec& roles = role_spec(task.name);
  AgentInstruction out;
  out.task_label = roles.task_label;
  out.input_role = roles.input_role;
  out.output_role = roles.output_role;
  out.rendered = "You are " + with_article(roles.task_label) + " agent. Given a context and " +
                 with_article(roles.input_role) + ", please give " +
                 with_article(roles.output_role) + " based on the context.";
  return out;
}

PromptBundle build_step_prompt(const Instance& instance, const Strategy& strat, Step step,
                               const std::string& context_text) {
  if (context_text.empty()) {
    throw Error("empty context for instance '" + instance.id + "'");
  }
  if (step == Step::g && strat.steps < 2) {
    throw Error("G step requested for the 1-step strategy '" +
                std::string(to_string(strat.name)) + "'");
  }
  if (strat.steps == 1 && step != Step::single) {
    throw Error("1-step strategy takes only step=single");
  }
  if (strat.steps == 2 && step == Step::single) {
    throw Error("2-step strategy prompts are built per step (E or G)");
  }

  const RoleSpec& roles = role_spec(instance.task.name);
  PromptBundle bundle;
  bundle.strategy = strat.name;
  bundle.step = step;
  bundle.agent_instruction = build_agent_instruction(instance.task).rendered;
  bundle.context_block = context_text;

  std::string query_block = "# " + std::string(roles.query_label) + ": " + instance.query;
  if (instance.task.answer_form == AnswerForm::option_choice && instance.options) {
    query_block += "\n# Options:";
    for (std::size_t i = 0; i < instance.options->size(); ++i) {
      query_block += "\n" + option_key(i) + ". " + (*instance.options)[i];
    }
  }
  bundle.query_block = std::move(query_block);

  std::string text = "# " + bundle.agent_instruction + "\n# " + strat.instruction_line;
  if (strat.name != StrategyName::cot) {
    text += "\n# ";
    text += kSectionFormatLine;
  }
  text += "\n# Context:\n" + context_text + "\n" + bundle.query_block;
  bundle.full_text = std::move(text);
  bundle.approx_tokens = estimate_tokens(bundle.full_text);
  return bundle;
}

std::size_t estimate_tokens(std::string_view text) {
  return (text.size() + 3) / 4;
}

}  // namespace e2g
