#include "rmis/rank_protocol.hpp"

#include <algorithm>

#include "rmis/errors.hpp"

namespace rmis {

bool forwarded_pair_rand_valid(const ForwardedPairRand& fwd, std::uint64_t iteration,
                               NodeId forwarder, NodeId announced_opponent,
                               std::uint32_t rank_bits, const KeyRegistry& keys) {
  if (fwd.iteration != iteration || fwd.opponent != announced_opponent) return false;
  if (fwd.bits.length != rank_bits) return false;
  const auto input = encode_pair_rand(fwd.iteration, fwd.opponent, forwarder, fwd.bits);
  return keys.verify(PublicKey{fwd.opponent}, input.view(), fwd.sig);
}

namespace {

bool valid_self_rand(const SelfRand* s, std::uint32_t rank_bits) {
  return s != nullptr && s->bits.length == rank_bits;
}

std::vector<const Message*> as_pointers(const Action& a) {
  std::vector<const Message*> ptrs;
  ptrs.reserve(a.outbound.size());
  for (const Message& m : a.outbound) ptrs.push_back(&m);
  return ptrs;
}

}  // namespace

RankStrategy::RankStrategy(RankSetup setup)
    : setup_(std::move(setup)),
      ones_(RankBits::all_ones(setup_.rank_bits)),
      undecided_(setup_.neighbors.size(), 1),
      nb_opponent_(setup_.neighbors.size()),
      nb_self_(setup_.neighbors.size()),
      nb_rank_(setup_.neighbors.size(), ones_),
      nb_rank_known_(setup_.neighbors.size(), 0) {
  if (!setup_.keys || !setup_.signing_key) throw ConfigError("rank protocol needs a key registry");
}

std::optional<RankBits> RankStrategy::neighbor_rank(NodeId j) const {
  auto it = std::lower_bound(setup_.neighbors.begin(), setup_.neighbors.end(), j);
  if (it == setup_.neighbors.end() || *it != j) return std::nullopt;
  const auto k = static_cast<std::size_t>(it - setup_.neighbors.begin());
  if (!undecided_[k]) return std::nullopt;
  return nb_rank_[k];
}

std::size_t RankStrategy::undecided_count() const {
  return static_cast<std::size_t>(std::count(undecided_.begin(), undecided_.end(), 1));
}

void RankStrategy::force(OutputValue v, Action& out) {
  forced_ = v;
  out.output = v;
}

void RankStrategy::mark_self_detected() {
  rank_pinned_ = true;
  rank_ = ones_;
}

void RankStrategy::prune_zero_outputs(const Observation& obs) {
  for (std::size_t k = 0; k < undecided_.size(); ++k) {
    if (undecided_[k] && obs.neighbor_outputs[k] == OutputValue::Zero) undecided_[k] = 0;
  }
}

void RankStrategy::act(const Observation& obs, RandomSource& rng, Action& out) {
  out.clear();
  if (forced_) {
    out.output = *forced_;
    return;
  }
  if (setup_.neighbors.empty()) {
    force(OutputValue::One, out);
    return;
  }
  switch (obs.round % 5) {
    case 0: select_opponent(obs, rng, out); break;
    case 1: generate_randomness(obs, rng, out); break;
    case 2: forward_and_self_rank(obs, out); break;
    case 3: compute_ranks_and_join(obs, out); break;
    default: react(obs, out); break;
  }
}

void RankStrategy::select_opponent(const Observation& obs, RandomSource& rng, Action& out) {
  prune_zero_outputs(obs);
  opponent_.reset();
  rank_pinned_ = false;
  prescribed_forward_.reset();
  std::fill(nb_opponent_.begin(), nb_opponent_.end(), std::nullopt);
  std::fill(nb_self_.begin(), nb_self_.end(), std::nullopt);
  std::fill(nb_rank_.begin(), nb_rank_.end(), ones_);
  std::fill(nb_rank_known_.begin(), nb_rank_known_.end(), 0);

  const std::size_t live = undecided_count();
  if (live == 0) {
    force(OutputValue::One, out);
    return;
  }
  std::size_t pick = rng.opponent_index(obs.round, live);
  for (std::size_t k = 0; k < undecided_.size(); ++k) {
    if (!undecided_[k]) continue;
    if (pick-- == 0) {
      opponent_ = setup_.neighbors[k];
      break;
    }
  }
  out.outbound.push_back(Message{setup_.self, std::nullopt, obs.round, OpponentChoice{*opponent_}});
}

void RankStrategy::generate_randomness(const Observation& obs, RandomSource& rng, Action& out) {
  prune_zero_outputs(obs);
  const std::uint64_t iteration = iteration_of(obs.round);
  if (!opponent_) mark_self_detected();

  for (std::size_t k = 0; k < undecided_.size(); ++k) {
    if (!undecided_[k]) continue;
    if (const auto* choice = unique_payload<OpponentChoice>(obs.from_slot(k))) {
      nb_opponent_[k] = choice->opponent;
    } else {
      nb_rank_[k] = ones_;
      nb_rank_known_[k] = 1;
      been_cheated_ = true;
    }
  }

  self_bits_ = rng.self_bits(obs.round, setup_.rank_bits);
  out.outbound.push_back(Message{setup_.self, std::nullopt, obs.round, SelfRand{self_bits_}});
  for (std::size_t k = 0; k < undecided_.size(); ++k) {
    if (!undecided_[k] || nb_opponent_[k] != setup_.self) continue;
    const NodeId j = setup_.neighbors[k];
    const RankBits bits = rng.pair_bits(obs.round, j, setup_.rank_bits);
    const auto input = encode_pair_rand(iteration, setup_.self, j, bits);
    const Signature sig = setup_.keys->sign(*setup_.signing_key, input.view());
    out.outbound.push_back(
        Message{setup_.self, std::nullopt, obs.round, PairRand{iteration, setup_.self, j, bits, sig}});
  }
}

void RankStrategy::forward_and_self_rank(const Observation& obs, Action& out) {
  prune_zero_outputs(obs);
  const std::uint64_t iteration = iteration_of(obs.round);
  for (std::size_t k = 0; k < undecided_.size(); ++k) {
    if (!undecided_[k]) continue;
    const auto* s = unique_payload<SelfRand>(obs.from_slot(k));
    if (valid_self_rand(s, setup_.rank_bits)) nb_self_[k] = s->bits;
  }
  if (!opponent_) return;

  const std::size_t slot = std::lower_bound(setup_.neighbors.begin(), setup_.neighbors.end(), *opponent_) -
                           setup_.neighbors.begin();
  const PairRand* share = nullptr;
  int matches = 0;
  for (const Message* m : obs.from_slot(slot)) {
    const auto* p = std::get_if<PairRand>(&m->payload);
    if (p && p->to == setup_.self) {
      share = p;
      ++matches;
    }
  }
  const bool valid =
      matches == 1 && share->iteration == iteration && share->from == *opponent_ &&
      share->bits.length == setup_.rank_bits &&
      setup_.keys->verify(PublicKey{*opponent_},
                          encode_pair_rand(iteration, *opponent_, setup_.self, share->bits).view(),
                          share->sig);
  if (!valid) {
    been_cheated_ = true;
    mark_self_detected();
    return;
  }
  if (!rank_pinned_) rank_ = self_bits_ ^ share->bits;
  prescribed_forward_ = ForwardedPairRand{iteration, *opponent_, share->bits, share->sig};
  out.outbound.push_back(Message{setup_.self, std::nullopt, obs.round, *prescribed_forward_});
}

void RankStrategy::compute_ranks_and_join(const Observation& obs, Action& out) {
  for (std::size_t k = 0; k < undecided_.size(); ++k) {
    if (!undecided_[k]) continue;
    const auto o = obs.neighbor_outputs[k];
    if (o == OutputValue::One || o == OutputValue::Bot) {
      force(OutputValue::Bot, out);
      return;
    }
  }
  prune_zero_outputs(obs);
  const std::uint64_t iteration = iteration_of(obs.round);
  bool lowest = true;
  for (std::size_t k = 0; k < undecided_.size(); ++k) {
    if (!undecided_[k]) continue;
    if (!nb_rank_known_[k]) {
      const auto* fwd = unique_payload<ForwardedPairRand>(obs.from_slot(k));
      if (fwd && nb_self_[k] && nb_opponent_[k] &&
          forwarded_pair_rand_valid(*fwd, iteration, setup_.neighbors[k], *nb_opponent_[k],
                                    setup_.rank_bits, *setup_.keys)) {
        nb_rank_[k] = *nb_self_[k] ^ fwd->bits;
      } else {
        nb_rank_[k] = ones_;
        been_cheated_ = true;
      }
      nb_rank_known_[k] = 1;
    }
    lowest &= rank_.value < nb_rank_[k].value;
  }
  if (lowest) out.output = OutputValue::One;
}

void RankStrategy::react(const Observation& obs, Action& out) {
  bool any_one = false;
  bool all_joined_lower = true;
  for (std::size_t k = 0; k < undecided_.size(); ++k) {
    if (!undecided_[k]) continue;
    const auto o = obs.neighbor_outputs[k];
    if (o == OutputValue::Bot) {
      force(OutputValue::Bot, out);
      return;
    }
    if (o == OutputValue::One) {
      any_one = true;
      all_joined_lower &= nb_rank_[k].value < rank_.value;
    }
  }
  if (any_one) {
    if (all_joined_lower) {
      force(been_cheated_ ? OutputValue::Bot : OutputValue::Zero, out);
    } else {
      force(OutputValue::Bot, out);
    }
    return;
  }
  prune_zero_outputs(obs);
  if (undecided_count() == 0) force(OutputValue::One, out);
}

void RankStrategy::record_sent(const Observation& obs, const Action& actual) {
  if (forced_) return;
  // Neighbors pin a node's rank to all-ones whenever one of its broadcasts
  // fails their checks; the node adopts the same rank so its view agrees.
  const auto sent = as_pointers(actual);
  const std::span<const Message* const> view(sent);
  switch (obs.round % 5) {
    case 0: {
      const auto* choice = unique_payload<OpponentChoice>(view);
      const std::size_t slot =
          choice ? std::lower_bound(setup_.neighbors.begin(), setup_.neighbors.end(), choice->opponent) -
                       setup_.neighbors.begin()
                 : setup_.neighbors.size();
      if (choice && slot < setup_.neighbors.size() && setup_.neighbors[slot] == choice->opponent &&
          undecided_[slot]) {
        opponent_ = choice->opponent;
      } else {
        opponent_.reset();
      }
      break;
    }
    case 1: {
      const auto* s = unique_payload<SelfRand>(view);
      if (valid_self_rand(s, setup_.rank_bits)) {
        self_bits_ = s->bits;
      } else {
        mark_self_detected();
      }
      break;
    }
    case 2: {
      if (!prescribed_forward_) break;
      const auto* fwd = unique_payload<ForwardedPairRand>(view);
      if (!fwd || !(*fwd == *prescribed_forward_)) mark_self_detected();
      break;
    }
    default:
      break;
  }
}

RankHonestStrategy::RankHonestStrategy(RankSetup setup)
    : setup_(std::move(setup)),
      undecided_(setup_.neighbors.size(), 1),
      nb_opponent_(setup_.neighbors.size(), 0),
      nb_self_(setup_.neighbors.size()),
      nb_rank_(setup_.neighbors.size()) {
  if (!setup_.keys || !setup_.signing_key) throw ConfigError("rank protocol needs a key registry");
}

void RankHonestStrategy::act(const Observation& obs, RandomSource& rng, Action& out) {
  out.clear();
  const std::size_t deg = setup_.neighbors.size();
  const std::uint64_t iteration = obs.round / 5 + 1;
  const NodeId self = setup_.self;
  switch (obs.round % 5) {
    case 0: {
      std::vector<std::size_t> live;
      for (std::size_t k = 0; k < deg; ++k) {
        if (undecided_[k] && obs.neighbor_outputs[k] == OutputValue::Zero) undecided_[k] = 0;
        if (undecided_[k]) live.push_back(k);
      }
      if (live.empty()) {
        out.output = OutputValue::One;
        return;
      }
      opponent_ = setup_.neighbors[live[rng.opponent_index(obs.round, live.size())]];
      out.outbound.push_back(Message{self, std::nullopt, obs.round, OpponentChoice{opponent_}});
      break;
    }
    case 1: {
      for (std::size_t k = 0; k < deg; ++k) {
        if (!undecided_[k]) continue;
        for (const Message* m : obs.from_slot(k)) {
          if (const auto* c = std::get_if<OpponentChoice>(&m->payload)) nb_opponent_[k] = c->opponent;
        }
      }
      self_bits_ = rng.self_bits(obs.round, setup_.rank_bits);
      out.outbound.push_back(Message{self, std::nullopt, obs.round, SelfRand{self_bits_}});
      for (std::size_t k = 0; k < deg; ++k) {
        if (!undecided_[k] || nb_opponent_[k] != self) continue;
        const NodeId j = setup_.neighbors[k];
        const RankBits bits = rng.pair_bits(obs.round, j, setup_.rank_bits);
        const Signature sig =
            setup_.keys->sign(*setup_.signing_key, encode_pair_rand(iteration, self, j, bits).view());
        out.outbound.push_back(Message{self, std::nullopt, obs.round, PairRand{iteration, self, j, bits, sig}});
      }
      break;
    }
    case 2: {
      for (std::size_t k = 0; k < deg; ++k) {
        if (!undecided_[k]) continue;
        for (const Message* m : obs.from_slot(k)) {
          if (const auto* s = std::get_if<SelfRand>(&m->payload)) nb_self_[k] = s->bits;
          const auto* p = std::get_if<PairRand>(&m->payload);
          if (p && setup_.neighbors[k] == opponent_ && p->to == self) {
            rank_ = self_bits_ ^ p->bits;
            out.outbound.push_back(
                Message{self, std::nullopt, obs.round, ForwardedPairRand{iteration, opponent_, p->bits, p->sig}});
          }
        }
      }
      break;
    }
    case 3: {
      bool lowest = true;
      for (std::size_t k = 0; k < deg; ++k) {
        if (!undecided_[k]) continue;
        for (const Message* m : obs.from_slot(k)) {
          if (const auto* f = std::get_if<ForwardedPairRand>(&m->payload)) nb_rank_[k] = nb_self_[k] ^ f->bits;
        }
        lowest &= rank_.value < nb_rank_[k].value;
      }
      if (lowest) out.output = OutputValue::One;
      break;
    }
    default: {
      for (std::size_t k = 0; k < deg; ++k) {
        if (undecided_[k] && obs.neighbor_outputs[k] == OutputValue::One) {
          out.output = OutputValue::Zero;
          return;
        }
      }
      bool any_left = false;
      for (std::size_t k = 0; k < deg; ++k) {
        if (undecided_[k] && obs.neighbor_outputs[k] == OutputValue::Zero) undecided_[k] = 0;
        any_left |= undecided_[k] != 0;
      }
      if (!any_left) out.output = OutputValue::One;
      break;
    }
  }
}

}  // namespace rmis
