#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rmis/strategy.hpp"

namespace rmis {

enum class DeviationKind {
  BiasedMoves,    // params: p_rock, p_paper, p_scissors
  Silent,
  GarbageSender,
  EarlyOne,
  EarlyZero,
  EarlyBot,
  BiasedRand,     // params: P(bit = 1) for own string, P(bit = 1) for issued strings
  StaleForward,
  WrongForward,
};

std::string_view to_string(DeviationKind kind);
DeviationKind parse_deviation_kind(std::string_view name);

// Whether some honest neighbor can prove the behavior inconsistent with the protocol.
bool detectable(DeviationKind kind);
bool applicable(DeviationKind kind, Protocol protocol);
std::vector<DeviationKind> catalog(Protocol protocol);

struct DeviationSpec {
  NodeId node = 0;
  DeviationKind kind = DeviationKind::Silent;
  std::vector<double> params;  // empty: defaults for the kind
  std::uint64_t activation_round = 0;

  friend bool operator==(const DeviationSpec&, const DeviationSpec&) = default;
};

// "node=0,strategy=biased_moves,params=1:0:0,activation=3". Only node and
// strategy are required.
DeviationSpec parse_deviation(std::string_view text);
std::string format_deviation(const DeviationSpec& spec);

// Parameters with defaults filled in; throws ConfigError when they are malformed.
std::vector<double> resolved_params(const DeviationSpec& spec);

// Throws ConfigError when the deviation does not fit the protocol or graph.
void check_deviation(const DeviationSpec& spec, Protocol protocol, std::size_t n);

// Runtime side of a deviation: supplies the deviator's randomness and rewrites
// the prescribed Action into the one actually taken.
class DeviationBehavior {
 public:
  DeviationBehavior(DeviationSpec spec, std::uint64_t seed, std::size_t garbage_bytes);

  std::unique_ptr<RandomSource> make_random() const;

  // `actual` receives the deviant Action; before activation it equals `honest`.
  void apply(const Observation& obs, const Action& honest, Action& actual);

  const DeviationSpec& spec() const { return spec_; }
  bool fired() const { return fired_round_.has_value(); }
  std::optional<std::uint64_t> fired_round() const { return fired_round_; }

 private:
  void remember_pair_rands(const Observation& obs);
  Payload garbage(std::uint64_t round, std::size_t index) const;

  DeviationSpec spec_;
  std::vector<double> params_;
  std::uint64_t seed_;
  std::size_t garbage_bytes_;
  std::optional<std::uint64_t> fired_round_;
  std::vector<PairRand> received_;  // PairRands addressed to the deviator, oldest first
};

}  // namespace rmis
