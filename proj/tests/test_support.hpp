#pragma once
// Shared fixtures: scripted randomness, hand-built observations and a small
// lockstep driver that is independent of the engine's delivery code.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "rmis/graph.hpp"
#include "rmis/strategy.hpp"

namespace rmis::testing {

class ScriptedRandom final : public RandomSource {
 public:
  Move default_move = Move::Rock;
  std::map<std::pair<std::uint64_t, NodeId>, Move> moves;  // (round, against)
  std::map<std::uint64_t, std::size_t> opponent;           // round -> index
  std::map<std::uint64_t, std::uint64_t> self;             // round -> bits
  std::map<std::pair<std::uint64_t, NodeId>, std::uint64_t> pair;
  std::uint64_t default_bits = 0;

  Move move(std::uint64_t round, NodeId against) override {
    auto it = moves.find({round, against});
    return it == moves.end() ? default_move : it->second;
  }
  std::size_t opponent_index(std::uint64_t round, std::size_t candidates) override {
    auto it = opponent.find(round);
    return it == opponent.end() ? 0 : it->second % candidates;
  }
  RankBits self_bits(std::uint64_t round, std::uint32_t length) override {
    auto it = self.find(round);
    return clip(it == self.end() ? default_bits : it->second, length);
  }
  RankBits pair_bits(std::uint64_t round, NodeId recipient, std::uint32_t length) override {
    auto it = pair.find({round, recipient});
    return clip(it == pair.end() ? default_bits : it->second, length);
  }

 private:
  static RankBits clip(std::uint64_t v, std::uint32_t length) {
    return {v & RankBits::all_ones(length).value, length};
  }
};

// Owns the storage an Observation points into.
struct ObservationBuilder {
  std::vector<NodeId> neighbors;
  std::vector<std::optional<OutputValue>> outputs;  // indexed by global node id
  std::vector<std::vector<Message>> by_slot;

  ObservationBuilder(std::vector<NodeId> nb, std::size_t n)
      : neighbors(std::move(nb)), outputs(n), by_slot(neighbors.size()) {}

  Observation build(std::uint64_t round) {
    inbox_.clear();
    offsets_.assign(1, 0);
    for (const auto& slot : by_slot) {
      for (const Message& m : slot) inbox_.push_back(&m);
      offsets_.push_back(static_cast<std::uint32_t>(inbox_.size()));
    }
    Observation obs;
    obs.round = round;
    obs.neighbors = neighbors;
    obs.neighbor_outputs = NeighborOutputs(outputs, neighbors);
    obs.inbox = inbox_;
    obs.inbox_offsets = offsets_;
    return obs;
  }
  void clear_messages() {
    for (auto& s : by_slot) s.clear();
  }

 private:
  std::vector<const Message*> inbox_;
  std::vector<std::uint32_t> offsets_;
};

// Synchronous rounds: every undecided node acts on the same snapshot, then
// messages are delivered for the next round and outputs become visible.
class LockstepDriver {
 public:
  using Tamper = std::function<void(NodeId, std::uint64_t, Action&)>;

  explicit LockstepDriver(const Graph& g) : g_(g), outputs_(g.size()), inbox_(g.size()) {
    for (NodeId i = 0; i < g.size(); ++i) inbox_[i].resize(g.degree(i));
  }

  std::vector<std::unique_ptr<NodeStrategy>> strategies;
  std::vector<std::unique_ptr<RandomSource>> rngs;
  Tamper tamper;

  void step() {
    std::vector<Action> acts(g_.size());
    for (NodeId i = 0; i < g_.size(); ++i) {
      if (outputs_[i]) continue;
      std::vector<const Message*> inbox;
      std::vector<std::uint32_t> offsets{0};
      for (const auto& slot : inbox_[i]) {
        for (const Message& m : slot) inbox.push_back(&m);
        offsets.push_back(static_cast<std::uint32_t>(inbox.size()));
      }
      Observation obs;
      obs.round = round_;
      obs.neighbors = g_.neighbors(i);
      obs.neighbor_outputs = NeighborOutputs(outputs_, g_.neighbors(i));
      obs.inbox = inbox;
      obs.inbox_offsets = offsets;
      strategies[i]->act(obs, *rngs[i], acts[i]);
      if (tamper) {
        tamper(i, round_, acts[i]);
        strategies[i]->record_sent(obs, acts[i]);
      }
    }
    std::vector<std::vector<std::vector<Message>>> next(g_.size());
    for (NodeId i = 0; i < g_.size(); ++i) next[i].resize(g_.degree(i));
    for (NodeId i = 0; i < g_.size(); ++i) {
      for (const Message& m : acts[i].outbound) {
        if (m.broadcast()) {
          for (NodeId j : g_.neighbors(i)) next[j][g_.neighbor_slot(j, i)].push_back(m);
        } else if (g_.adjacent(i, *m.to)) {
          next[*m.to][g_.neighbor_slot(*m.to, i)].push_back(m);
        }
      }
    }
    inbox_ = std::move(next);
    for (NodeId i = 0; i < g_.size(); ++i) {
      if (!outputs_[i] && acts[i].output) {
        outputs_[i] = acts[i].output;
        decided_round_[i] = round_;
      }
    }
    ++round_;
  }

  void run(std::uint64_t max_rounds) {
    for (std::uint64_t r = 0; r < max_rounds && !done(); ++r) step();
  }
  bool done() const {
    for (const auto& o : outputs_)
      if (!o) return false;
    return true;
  }
  std::uint64_t round() const { return round_; }
  const std::vector<std::optional<OutputValue>>& outputs() const { return outputs_; }
  std::optional<std::uint64_t> decided_round(NodeId i) const {
    auto it = decided_round_.find(i);
    if (it == decided_round_.end()) return std::nullopt;
    return it->second;
  }

 private:
  const Graph& g_;
  std::uint64_t round_ = 0;
  std::vector<std::optional<OutputValue>> outputs_;
  std::map<NodeId, std::uint64_t> decided_round_;
  std::vector<std::vector<std::vector<Message>>> inbox_;
};

}  // namespace rmis::testing
