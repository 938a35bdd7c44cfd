#include "rmis/utility.hpp"

#include <algorithm>

#include "rmis/errors.hpp"

namespace rmis {

std::string_view to_string(OutputValue v) {
  switch (v) {
    case OutputValue::Zero: return "0";
    case OutputValue::One: return "1";
    case OutputValue::Bot: return "bot";
  }
  return "?";
}

UtilityValue evaluate_node(std::optional<OutputValue> own,
                           std::span<const std::optional<OutputValue>> neighbor_outputs,
                           double payoff) {
  if (!own) throw ContractViolation("utility of a node without output");
  bool any_one = false;
  bool any_bot = false;
  for (const auto& out : neighbor_outputs) {
    if (!out) throw ContractViolation("utility with an undecided neighbor");
    any_one |= *out == OutputValue::One;
    any_bot |= *out == OutputValue::Bot;
  }
  if (*own == OutputValue::Bot || any_bot) return UtilityValue::finite(0.0);
  if (*own == OutputValue::Zero && any_one) return UtilityValue::finite(0.0);
  if (*own == OutputValue::One && !any_one) return UtilityValue::finite(payoff);
  return UtilityValue::negative_infinity();
}

std::vector<UtilityValue> evaluate_all(const Graph& g,
                                       std::span<const std::optional<OutputValue>> outputs,
                                       std::span<const double> payoff) {
  if (outputs.size() != g.size() || payoff.size() != g.size()) {
    throw ContractViolation("evaluate_all: outputs/payoff must cover every node");
  }
  std::vector<UtilityValue> result;
  result.reserve(g.size());
  std::vector<std::optional<OutputValue>> around;
  for (NodeId i = 0; i < g.size(); ++i) {
    around.clear();
    for (NodeId j : g.neighbors(i)) around.push_back(outputs[j]);
    result.push_back(evaluate_node(outputs[i], around, payoff[i]));
  }
  return result;
}

}  // namespace rmis
