#include "rmis/rps_protocol.hpp"

#include <algorithm>

namespace rmis {

RpsResult rps_outcome(std::optional<Move> mine, std::optional<Move> theirs) {
  if (mine == theirs) return RpsResult::Tie;
  if (!theirs) return RpsResult::IWins;
  if (!mine) return RpsResult::JWins;
  // Rock breaks scissors, scissors cut paper, paper covers rock.
  const bool i_wins = (*mine == Move::Rock && *theirs == Move::Scissors) ||
                      (*mine == Move::Paper && *theirs == Move::Rock) ||
                      (*mine == Move::Scissors && *theirs == Move::Paper);
  return i_wins ? RpsResult::IWins : RpsResult::JWins;
}

std::optional<Move> received_move(std::span<const Message* const> from_j) {
  if (from_j.size() != 1) return std::nullopt;
  if (const auto* mv = std::get_if<RpsMovePayload>(&from_j.front()->payload)) return mv->move;
  return std::nullopt;
}

RpsStrategy::RpsStrategy(NodeId self, std::span<const NodeId> neighbors)
    : self_(self),
      neighbors_(neighbors),
      undecided_(neighbors.size(), 1),
      sent_(neighbors.size()),
      result_(neighbors.size(), RpsResult::Tie) {}

std::size_t RpsStrategy::undecided_neighbor_count() const {
  return static_cast<std::size_t>(std::count(undecided_.begin(), undecided_.end(), 1));
}

void RpsStrategy::force(OutputValue v, Action& out) {
  forced_ = v;
  out.output = v;
}

void RpsStrategy::act(const Observation& obs, RandomSource& rng, Action& out) {
  out.clear();
  if (forced_) {
    out.output = *forced_;
    return;
  }
  if (neighbors_.empty()) {
    force(OutputValue::One, out);
    return;
  }
  switch (obs.round % 3) {
    case 0:
      for (std::size_t k = 0; k < neighbors_.size(); ++k) {
        if (!undecided_[k]) continue;
        const Move m = rng.move(obs.round, neighbors_[k]);
        sent_[k] = m;
        out.outbound.push_back(Message{self_, neighbors_[k], obs.round, RpsMovePayload{m}});
      }
      break;
    case 1:
      join_round(obs, out);
      break;
    default:
      react_round(obs, out);
      break;
  }
}

void RpsStrategy::record_sent(const Observation& obs, const Action& actual) {
  if (obs.round % 3 != 0 || forced_) return;
  // What the node actually told each neighbor is what its games are judged on.
  for (std::size_t k = 0; k < neighbors_.size(); ++k) {
    if (!undecided_[k]) continue;
    const Message* only = nullptr;
    int visible = 0;
    for (const Message& m : actual.outbound) {
      if (m.broadcast() || *m.to == neighbors_[k]) {
        only = &m;
        ++visible;
      }
    }
    sent_[k] = visible == 1 ? received_move(std::span<const Message* const>(&only, 1))
                            : std::nullopt;
  }
}

void RpsStrategy::join_round(const Observation& obs, Action& out) {
  for (std::size_t k = 0; k < neighbors_.size(); ++k) {
    if (!undecided_[k]) continue;
    const auto o = obs.neighbor_outputs[k];
    if (o == OutputValue::One || o == OutputValue::Bot) {
      force(OutputValue::Bot, out);
      return;
    }
  }
  for (std::size_t k = 0; k < neighbors_.size(); ++k) {
    if (undecided_[k] && obs.neighbor_outputs[k] == OutputValue::Zero) undecided_[k] = 0;
  }
  bool wins_all = true;
  for (std::size_t k = 0; k < neighbors_.size(); ++k) {
    if (!undecided_[k]) continue;
    const auto theirs = received_move(obs.from_slot(k));
    if (!theirs) been_cheated_ = true;
    result_[k] = rps_outcome(sent_[k], theirs);
    wins_all &= result_[k] == RpsResult::IWins;
  }
  if (wins_all) out.output = OutputValue::One;
}

void RpsStrategy::react_round(const Observation& obs, Action& out) {
  bool any_one = false;
  for (std::size_t k = 0; k < neighbors_.size(); ++k) {
    if (!undecided_[k]) continue;
    const auto o = obs.neighbor_outputs[k];
    if (o == OutputValue::Bot) {
      force(OutputValue::Bot, out);
      return;
    }
    any_one |= o == OutputValue::One;
  }
  if (any_one) {
    for (std::size_t k = 0; k < neighbors_.size(); ++k) {
      // A neighbor that joined without beating us (loss or tie) cheated.
      if (undecided_[k] && obs.neighbor_outputs[k] == OutputValue::One &&
          result_[k] != RpsResult::JWins) {
        been_cheated_ = true;
      }
    }
    force(been_cheated_ ? OutputValue::Bot : OutputValue::Zero, out);
    return;
  }
  for (std::size_t k = 0; k < neighbors_.size(); ++k) {
    if (undecided_[k] && obs.neighbor_outputs[k] == OutputValue::Zero) undecided_[k] = 0;
  }
  if (undecided_neighbor_count() == 0) force(OutputValue::One, out);
}

RpsHonestStrategy::RpsHonestStrategy(NodeId self, std::span<const NodeId> neighbors)
    : self_(self), neighbors_(neighbors), undecided_(neighbors.size(), 1), sent_(neighbors.size()) {}

void RpsHonestStrategy::act(const Observation& obs, RandomSource& rng, Action& out) {
  out.clear();
  const std::size_t deg = neighbors_.size();
  if (deg == 0) {
    out.output = OutputValue::One;
    return;
  }
  switch (obs.round % 3) {
    case 0:
      for (std::size_t k = 0; k < deg; ++k) {
        if (!undecided_[k]) continue;
        sent_[k] = rng.move(obs.round, neighbors_[k]);
        out.outbound.push_back(Message{self_, neighbors_[k], obs.round, RpsMovePayload{sent_[k]}});
      }
      break;
    case 1: {
      bool wins_all = true;
      for (std::size_t k = 0; k < deg && wins_all; ++k) {
        if (!undecided_[k]) continue;
        wins_all = rps_outcome(sent_[k], received_move(obs.from_slot(k))) == RpsResult::IWins;
      }
      if (wins_all) out.output = OutputValue::One;
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
