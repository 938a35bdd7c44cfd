#pragma once

#include <optional>
#include <vector>

#include "rmis/signing.hpp"
#include "rmis/strategy.hpp"

namespace rmis {

// The message of type T among `from_j`, if exactly one of that type is present.
template <typename T>
const T* unique_payload(std::span<const Message* const> from_j) {
  const T* found = nullptr;
  for (const Message* m : from_j) {
    if (const T* p = std::get_if<T>(&m->payload)) {
      if (found) return nullptr;
      found = p;
    }
  }
  return found;
}

// Checks a forwarded PairRand against the forwarder's announced opponent and
// the current iteration.
bool forwarded_pair_rand_valid(const ForwardedPairRand& fwd, std::uint64_t iteration,
                               NodeId forwarder, NodeId announced_opponent,
                               std::uint32_t rank_bits, const KeyRegistry& keys);

struct RankSetup {
  NodeId self = 0;
  std::span<const NodeId> neighbors;
  std::uint32_t rank_bits = 1;
  KeyRegistry* keys = nullptr;
  std::optional<SigningKey> signing_key;
};

// Full signed-rank strategy: five rounds per iteration (choose opponent,
// exchange randomness, forward opponent's signed share, compare ranks,
// react), with BeenCheated latch, all-ones rank for detected deviators and
// bot threats.
class RankStrategy final : public NodeStrategy {
 public:
  explicit RankStrategy(RankSetup setup);

  void act(const Observation& obs, RandomSource& rng, Action& out) override;
  void record_sent(const Observation& obs, const Action& actual) override;

  bool been_cheated() const override { return been_cheated_; }
  std::optional<OutputValue> forced_mode() const override { return forced_; }

  RankBits rank() const { return rank_; }
  // Rank this node computed for neighbor j in the current iteration.
  std::optional<RankBits> neighbor_rank(NodeId j) const;
  std::optional<NodeId> opponent() const { return opponent_; }

 private:
  void select_opponent(const Observation& obs, RandomSource& rng, Action& out);
  void generate_randomness(const Observation& obs, RandomSource& rng, Action& out);
  void forward_and_self_rank(const Observation& obs, Action& out);
  void compute_ranks_and_join(const Observation& obs, Action& out);
  void react(const Observation& obs, Action& out);

  void prune_zero_outputs(const Observation& obs);
  void force(OutputValue v, Action& out);
  void mark_self_detected();
  std::size_t undecided_count() const;
  static std::uint64_t iteration_of(std::uint64_t round) { return round / 5 + 1; }

  RankSetup setup_;
  RankBits ones_;
  std::vector<char> undecided_;
  std::vector<std::optional<NodeId>> nb_opponent_;
  std::vector<std::optional<RankBits>> nb_self_;
  std::vector<RankBits> nb_rank_;
  std::vector<char> nb_rank_known_;

  std::optional<NodeId> opponent_;
  RankBits self_bits_{};
  RankBits rank_{};
  bool rank_pinned_ = false;  // own rank forced to all-ones after a self-deviation
  std::optional<ForwardedPairRand> prescribed_forward_;
  bool been_cheated_ = false;
  std::optional<OutputValue> forced_;
};

// Honest-execution reference with all deviation handling removed.
class RankHonestStrategy final : public NodeStrategy {
 public:
  explicit RankHonestStrategy(RankSetup setup);

  void act(const Observation& obs, RandomSource& rng, Action& out) override;

 private:
  RankSetup setup_;
  std::vector<char> undecided_;
  std::vector<NodeId> nb_opponent_;
  std::vector<RankBits> nb_self_;
  std::vector<RankBits> nb_rank_;
  NodeId opponent_ = 0;
  RankBits self_bits_{};
  RankBits rank_{};
};

}  // namespace rmis
