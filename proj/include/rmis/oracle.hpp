#pragma once

#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "rmis/deviations.hpp"
#include "rmis/graph.hpp"
#include "rmis/strategy.hpp"

namespace rmis {

using Rational = boost::multiprecision::cpp_rational;

struct OracleResult {
  std::vector<Rational> inclusion;          // P(node ends with output 1)
  std::vector<Rational> expected_utility;   // with unit payoff
  std::vector<Rational> first_iteration_join;
  Rational expected_iterations;
};

// Exact absorbing-chain analysis over per-iteration outcomes for graphs with
// at most three nodes. rps enumerates one move per directed edge; rank
// enumerates the weak orderings of the active nodes' ranks, each ordering with
// b distinct levels on k nodes having mass C(2^L, b) / 2^(L k). The only
// supported deviation is biased_moves under rps.
OracleResult exact_small_oracle(const Graph& g, Protocol protocol, std::uint32_t rank_bits = 16,
                                const std::optional<DeviationSpec>& deviation = std::nullopt);

std::string to_decimal(const Rational& r, int digits = 10);

}  // namespace rmis
