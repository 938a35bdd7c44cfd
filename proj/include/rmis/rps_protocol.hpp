#pragma once

#include <optional>
#include <vector>

#include "rmis/strategy.hpp"

namespace rmis {

enum class RpsResult { IWins, JWins, Tie };

// nullopt stands for an invalid or missing move. Valid beats invalid; two
// invalid moves tie.
RpsResult rps_outcome(std::optional<Move> mine, std::optional<Move> theirs);

// The single valid move among `from_j`, if `from_j` holds exactly one message
// and it is an RpsMove.
std::optional<Move> received_move(std::span<const Message* const> from_j);

// Full strategy with every deviation-handling branch: three rounds per
// iteration (play, join, react), BeenCheated latch, and bot threats.
class RpsStrategy final : public NodeStrategy {
 public:
  RpsStrategy(NodeId self, std::span<const NodeId> neighbors);

  void act(const Observation& obs, RandomSource& rng, Action& out) override;
  void record_sent(const Observation& obs, const Action& actual) override;

  bool been_cheated() const override { return been_cheated_; }
  std::optional<OutputValue> forced_mode() const override { return forced_; }

  std::size_t undecided_neighbor_count() const;

 private:
  void join_round(const Observation& obs, Action& out);
  void react_round(const Observation& obs, Action& out);
  void force(OutputValue v, Action& out);

  NodeId self_;
  std::span<const NodeId> neighbors_;
  std::vector<char> undecided_;
  std::vector<std::optional<Move>> sent_;
  std::vector<RpsResult> result_;
  bool been_cheated_ = false;
  std::optional<OutputValue> forced_;
};

// Honest-execution reference: the same protocol with all deviation handling
// removed. Used to check that honest runs of RpsStrategy match it exactly.
class RpsHonestStrategy final : public NodeStrategy {
 public:
  RpsHonestStrategy(NodeId self, std::span<const NodeId> neighbors);

  void act(const Observation& obs, RandomSource& rng, Action& out) override;

 private:
  NodeId self_;
  std::span<const NodeId> neighbors_;
  std::vector<char> undecided_;
  std::vector<Move> sent_;
};

}  // namespace rmis
