#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "rmis/graph.hpp"
#include "rmis/messages.hpp"
#include "rmis/random.hpp"

namespace rmis {

enum class Protocol { Rps, Rank };

Protocol parse_protocol(std::string_view name);
std::string_view to_string(Protocol p);

// Engine rounds per protocol iteration.
constexpr std::uint64_t rounds_per_iteration(Protocol p) { return p == Protocol::Rps ? 3 : 5; }

// Outputs of a node's neighbors, read through the global output table.
class NeighborOutputs {
 public:
  NeighborOutputs() = default;
  NeighborOutputs(std::span<const std::optional<OutputValue>> all, std::span<const NodeId> neighbors)
      : all_(all), neighbors_(neighbors) {}

  std::size_t size() const { return neighbors_.size(); }
  std::optional<OutputValue> operator[](std::size_t slot) const { return all_[neighbors_[slot]]; }
  bool any_undecided() const {
    for (NodeId j : neighbors_) {
      if (!all_[j]) return true;
    }
    return false;
  }

 private:
  std::span<const std::optional<OutputValue>> all_;
  std::span<const NodeId> neighbors_;
};

// What a node sees at the start of a round: messages its neighbors sent in the
// previous round (grouped by neighbor slot, in sending order) and the outputs
// its neighbors committed in strictly earlier rounds.
struct Observation {
  std::uint64_t round = 0;
  std::span<const NodeId> neighbors;
  NeighborOutputs neighbor_outputs;
  std::span<const Message* const> inbox;
  std::span<const std::uint32_t> inbox_offsets;  // size = neighbors.size() + 1

  std::span<const Message* const> from_slot(std::size_t slot) const {
    return inbox.subspan(inbox_offsets[slot], inbox_offsets[slot + 1] - inbox_offsets[slot]);
  }
};

// A node's private randomness. Every draw is addressed by (round, purpose,
// counterpart), so swapping one node's source leaves every other node's
// draws untouched.
class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual Move move(std::uint64_t round, NodeId against) = 0;
  virtual std::size_t opponent_index(std::uint64_t round, std::size_t candidates) = 0;
  virtual RankBits self_bits(std::uint64_t round, std::uint32_t length) = 0;
  virtual RankBits pair_bits(std::uint64_t round, NodeId recipient, std::uint32_t length) = 0;
};

class PrfRandom final : public RandomSource {
 public:
  PrfRandom(std::uint64_t seed, NodeId node) : node_key_(prf_node_key(seed, node)) {}

  // Equals prf(seed, node, round, purpose, extra).
  std::uint64_t word(std::uint64_t round, Purpose purpose, std::uint64_t extra = 0) const {
    if (round != cached_round_ || purpose != cached_purpose_) {
      cached_round_ = round;
      cached_purpose_ = purpose;
      round_key_ = prf_round_key(node_key_, round, purpose);
    }
    return prf_finish(round_key_, extra);
  }

  Move move(std::uint64_t round, NodeId against) override {
    return static_cast<Move>(bounded(word(round, Purpose::RpsMove, against), 3));
  }
  std::size_t opponent_index(std::uint64_t round, std::size_t candidates) override {
    return static_cast<std::size_t>(bounded(word(round, Purpose::Opponent), candidates));
  }
  RankBits self_bits(std::uint64_t round, std::uint32_t length) override {
    return mask(word(round, Purpose::SelfBits), length);
  }
  RankBits pair_bits(std::uint64_t round, NodeId recipient, std::uint32_t length) override {
    return mask(word(round, Purpose::PairBits, recipient), length);
  }

 private:
  static RankBits mask(std::uint64_t w, std::uint32_t length) {
    return {w & RankBits::all_ones(length).value, length};
  }
  std::uint64_t node_key_;
  mutable std::uint64_t cached_round_ = ~0ULL;
  mutable Purpose cached_purpose_ = Purpose::RpsMove;
  mutable std::uint64_t round_key_ = 0;
};

// A per-node strategy algorithm. The engine calls act() once per round while
// the node is undecided, then reports the Action that actually went out
// (which differs from the prescribed one only for a deviating node).
class NodeStrategy {
 public:
  virtual ~NodeStrategy() = default;

  virtual void act(const Observation& obs, RandomSource& rng, Action& out) = 0;
  virtual void record_sent(const Observation& obs, const Action& actual) {
    (void)obs;
    (void)actual;
  }

  virtual bool been_cheated() const { return false; }
  // Latched "output this value from now on" mode, if any.
  virtual std::optional<OutputValue> forced_mode() const { return std::nullopt; }
};

}  // namespace rmis
