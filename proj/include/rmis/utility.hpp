#pragma once

#include <compare>
#include <optional>
#include <span>
#include <vector>

#include "rmis/graph.hpp"
#include "rmis/messages.hpp"

namespace rmis {

// Payoff of a terminal configuration: a finite value or negative infinity.
// Negative infinity is symbolic and sorts below every finite value.
class UtilityValue {
 public:
  static UtilityValue finite(double v) { return UtilityValue(false, v); }
  static UtilityValue negative_infinity() { return UtilityValue(true, 0.0); }

  bool is_negative_infinity() const { return neg_inf_; }
  // Precondition: !is_negative_infinity().
  double value() const { return value_; }

  friend std::partial_ordering operator<=>(const UtilityValue& a, const UtilityValue& b) {
    if (a.neg_inf_ || b.neg_inf_) return b.neg_inf_ <=> a.neg_inf_;
    return a.value_ <=> b.value_;
  }
  friend bool operator==(const UtilityValue& a, const UtilityValue& b) {
    return a.neg_inf_ == b.neg_inf_ && (a.neg_inf_ || a.value_ == b.value_);
  }

 private:
  UtilityValue(bool neg_inf, double v) : neg_inf_(neg_inf), value_(v) {}
  bool neg_inf_;
  double value_;
};

// Local utility with first-matching-case semantics:
//   own or any neighbor output is bot          -> 0
//   own 0 and some neighbor 1                  -> 0
//   own 1 and no neighbor in {1, bot}          -> payoff
//   otherwise                                  -> -inf
// Throws ContractViolation if any output is missing.
UtilityValue evaluate_node(std::optional<OutputValue> own,
                           std::span<const std::optional<OutputValue>> neighbor_outputs,
                           double payoff);

std::vector<UtilityValue> evaluate_all(const Graph& g,
                                       std::span<const std::optional<OutputValue>> outputs,
                                       std::span<const double> payoff);

}  // namespace rmis
