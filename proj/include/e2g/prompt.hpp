#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "e2g/task.hpp"

namespace e2g {

enum class StrategyName { cot, e2g_base, e2g_pro };
enum class Step { e, g, single };

std::string_view to_string(StrategyName name);
std::string_view to_string(Step step);
StrategyName strategy_name_from_string(std::string_view s);

struct Strategy {
  StrategyName name = StrategyName::e2g_base;
  std::string instruction_line;
  int steps = 2;  // 1 or 2
};

const Strategy& strategy(StrategyName name);

struct AgentInstruction {
  std::string task_label;
  std::string input_role;
  std::string output_role;
  std::string rendered;
};

/// Renders the generic agent objective for a task. The same instruction is
/// reused verbatim by both steps of a two-step run (single-agent design).
AgentInstruction build_agent_instruction(const TaskKind& task);

struct PromptBundle {
  StrategyName strategy = StrategyName::e2g_base;
  Step step = Step::single;
  std::string agent_instruction;
  std::string context_block;  // the raw context text fed under "# Context:"
  std::string query_block;    // "# Question: ..." plus any option list
  std::string full_text;
  std::size_t approx_tokens = 0;
};

/// Assembles the model input: agent instruction, strategy instruction,
/// "# Context:" block, then the query block. Two bundles for the same
/// instance and strategy differ only in context_block. Pure.
PromptBundle build_step_prompt(const Instance& instance, const Strategy& strategy, Step step,
                               const std::string& context_text);

/// ceil(characters / 4). Crude, but monotone in text length and cheap.
std::size_t estimate_tokens(std::string_view text);

}  // namespace e2g
