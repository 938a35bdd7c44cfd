#include "rmis/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rmis/errors.hpp"
#include "rmis/rank_protocol.hpp"
#include "rmis/rps_protocol.hpp"

namespace rmis {

namespace {

constexpr std::uint64_t kMaxU64 = std::numeric_limits<std::uint64_t>::max();

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > kMaxU64 / a) return kMaxU64;
  return a * b;
}

std::uint64_t ceil_log2(std::size_t n) {
  std::uint64_t k = 0;
  while ((std::uint64_t{1} << k) < n && k < 63) ++k;
  return k;
}

}  // namespace

Protocol parse_protocol(std::string_view name) {
  if (name == "rps") return Protocol::Rps;
  if (name == "rank") return Protocol::Rank;
  throw ConfigError("unknown protocol '" + std::string(name) + "' (expected rps or rank)");
}

std::string_view to_string(Protocol p) { return p == Protocol::Rps ? "rps" : "rank"; }

std::uint64_t default_round_cap(Protocol protocol, std::size_t n, std::size_t max_degree) {
  const std::uint64_t base = 60 * std::max<std::uint64_t>(1, ceil_log2(n));
  if (protocol == Protocol::Rank) return base;
  std::uint64_t cap = base;
  for (std::size_t k = 0; k < 2 * max_degree && cap != kMaxU64; ++k) cap = sat_mul(cap, 3);
  return cap;
}

std::uint64_t effective_round_cap(const RunConfig& config) {
  if (config.round_cap != 0) return config.round_cap;
  return default_round_cap(config.protocol, config.graph->size(), max_degree(*config.graph));
}

std::uint32_t effective_rank_bits(const RunConfig& config) {
  if (config.rank_bits != 0) return config.rank_bits;
  const double n = static_cast<double>(std::max<std::size_t>(config.graph->size(), 2));
  const double bits = std::ceil(config.rank_bits_c * std::log2(n) - 1e-9);
  return static_cast<std::uint32_t>(std::clamp(bits, 1.0, 64.0));
}

double payoff_of(const RunConfig& config, NodeId node) {
  if (config.payoff.empty()) return 1.0;
  if (config.payoff.size() == 1) return config.payoff.front();
  return config.payoff[node];
}

void validate_config(const RunConfig& config) {
  if (!config.graph) throw ConfigError("run config has no graph");
  const std::size_t n = config.graph->size();
  if (n == 0) throw ConfigError("graph has no nodes");
  if (!(config.rank_bits_c > 0.0) || !std::isfinite(config.rank_bits_c)) {
    throw ConfigError("rank_bits_c must be positive");
  }
  if (config.rank_bits > 64) throw ConfigError("rank bits above 64 are not supported");
  if (config.protocol == Protocol::Rank && config.rank_bits == 0 &&
      std::ceil(config.rank_bits_c * std::log2(static_cast<double>(std::max<std::size_t>(n, 2))) - 1e-9) > 64) {
    throw ConfigError("rank_bits_c gives more than 64 rank bits");
  }
  if (config.payoff.size() > 1 && config.payoff.size() != n) {
    throw ConfigError("payoff needs one value or one per node");
  }
  for (double v : config.payoff) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("payoffs must be positive and finite");
  }
  if (config.variant == Variant::Honest && !config.deviations.empty()) {
    throw ConfigError("the honest variant cannot host deviations");
  }
  std::vector<char> seen(n, 0);
  for (const auto& d : config.deviations) {
    check_deviation(d, config.protocol, n);
    if (seen[d.node]++) throw ConfigError("two deviations on one node");
  }
}

Simulation::Simulation(RunConfig config) : config_(std::move(config)) {
  validate_config(config_);
  const Graph& g = *config_.graph;
  const std::size_t n = g.size();
  cap_ = effective_round_cap(config_);
  undecided_ = n;

  if (config_.protocol == Protocol::Rank) {
    keys_ = make_registry(config_.signatures, config_.master_seed);
  }
  const std::uint32_t bits = effective_rank_bits(config_);

  behavior_.resize(n);
  deviator_.assign(n, 0);
  for (const auto& d : config_.deviations) {
    behavior_[d.node] = std::make_unique<DeviationBehavior>(d, config_.master_seed, config_.garbage_bytes);
    deviator_[d.node] = 1;
  }

  strategies_.reserve(n);
  rngs_.reserve(n);
  for (NodeId i = 0; i < n; ++i) {
    if (behavior_[i]) {
      rngs_.push_back(behavior_[i]->make_random());
    } else {
      rngs_.push_back(std::make_unique<PrfRandom>(config_.master_seed, i));
    }
    if (config_.protocol == Protocol::Rps) {
      if (config_.variant == Variant::Full) {
        strategies_.push_back(std::make_unique<RpsStrategy>(i, g.neighbors(i)));
      } else {
        strategies_.push_back(std::make_unique<RpsHonestStrategy>(i, g.neighbors(i)));
      }
    } else {
      KeyPair kp = keys_->keygen(i);
      RankSetup setup{i, g.neighbors(i), bits, keys_.get(), kp.signing_key};
      if (config_.variant == Variant::Full) {
        strategies_.push_back(std::make_unique<RankStrategy>(std::move(setup)));
      } else {
        strategies_.push_back(std::make_unique<RankHonestStrategy>(std::move(setup)));
      }
    }
  }

  outputs_.assign(n, std::nullopt);
  pending_.assign(n, std::nullopt);
  decided_round_.assign(n, std::nullopt);
  current_.resize(n);
  previous_.resize(n);
  inbox_.resize(n);
  inbox_slot_.resize(n);
  if (config_.record_trace) trace_.emplace();
}

Simulation::~Simulation() = default;

bool Simulation::finished() const { return undecided_ == 0 || round_ >= cap_; }

void Simulation::commit_output(NodeId node, OutputValue value) {
  if (outputs_[node]) throw EngineFault("output of node " + std::to_string(node) + " overwritten");
  outputs_[node] = value;
  decided_round_[node] = round_;
  --undecided_;
}

void Simulation::build_observation(NodeId i) {
  const auto nbrs = config_.graph->neighbors(i);
  const auto& slots = inbox_slot_[i];
  obs_offsets_.resize(nbrs.size() + 1);
  std::uint32_t p = 0;
  for (std::uint32_t k = 0; k < nbrs.size(); ++k) {
    obs_offsets_[k] = p;
    while (p < slots.size() && slots[p] == k) ++p;
  }
  obs_offsets_[nbrs.size()] = p;
  obs_.round = round_;
  obs_.neighbors = nbrs;
  obs_.neighbor_outputs = NeighborOutputs(outputs_, nbrs);
  obs_.inbox = inbox_[i];
  obs_.inbox_offsets = obs_offsets_;
}

void Simulation::stamp(NodeId i, Action& a) const {
  for (Message& m : a.outbound) {
    m.sender = i;
    m.round_sent = round_;
  }
}

void Simulation::check_addressing(NodeId i, const Action& a) const {
  for (const Message& m : a.outbound) {
    if (m.broadcast()) continue;
    if (config_.protocol == Protocol::Rank) {
      throw EngineFault("node " + std::to_string(i) + " sent a unicast under the broadcast-only protocol");
    }
    if (!config_.graph->adjacent(i, *m.to)) {
      throw EngineFault("node " + std::to_string(i) + " addressed non-neighbor " + std::to_string(*m.to));
    }
  }
}

void Simulation::note_detection() {
  for (NodeId i = 0; i < outputs_.size(); ++i) {
    if (deviator_[i]) continue;
    if (strategies_[i]->been_cheated() || outputs_[i] == OutputValue::Bot) {
      detected_ = true;
      return;
    }
  }
}

void Simulation::deliver() {
  const Graph& g = *config_.graph;
  for (NodeId i = 0; i < inbox_.size(); ++i) {
    inbox_[i].clear();
    inbox_slot_[i].clear();
  }
  // Senders in increasing id order land in increasing slot order, because
  // adjacency lists are sorted. Decided recipients never read their inbox.
  for (NodeId j = 0; j < current_.size(); ++j) {
    if (current_[j].outbound.empty()) continue;
    const auto nbrs = g.neighbors(j);
    const auto mirror = g.mirror_slots(j);
    std::size_t cursor = 0;  // prescribed unicasts follow neighbor order
    for (const Message& m : current_[j].outbound) {
      if (m.broadcast()) {
        for (std::size_t k = 0; k < nbrs.size(); ++k) {
          if (outputs_[nbrs[k]]) continue;
          inbox_[nbrs[k]].push_back(&m);
          inbox_slot_[nbrs[k]].push_back(mirror[k]);
        }
      } else {
        while (cursor < nbrs.size() && nbrs[cursor] < *m.to) ++cursor;
        if (cursor == nbrs.size() || nbrs[cursor] != *m.to) cursor = g.neighbor_slot(j, *m.to);
        if (outputs_[*m.to]) continue;
        inbox_[*m.to].push_back(&m);
        inbox_slot_[*m.to].push_back(mirror[cursor]);
      }
    }
  }
}

void Simulation::step_round() {
  const std::size_t n = outputs_.size();
  std::swap(current_, previous_);
  for (NodeId i = 0; i < n; ++i) {
    current_[i].clear();
    pending_[i].reset();
  }

  for (NodeId i = 0; i < n; ++i) {
    if (outputs_[i]) continue;
    build_observation(i);
    Action& out = current_[i];
    if (behavior_[i]) {
      strategies_[i]->act(obs_, *rngs_[i], prescribed_);
      behavior_[i]->apply(obs_, prescribed_, out);
      stamp(i, out);
      check_addressing(i, out);
      strategies_[i]->record_sent(obs_, out);
    } else {
      // Prescribed strategies address only neighbors and agree with
      // themselves; only deviators need checking and feedback.
      strategies_[i]->act(obs_, *rngs_[i], out);
      stamp(i, out);
    }
    pending_[i] = out.output;
    if (trace_) trace_->push_back(TraceEntry{round_, i, out});
  }

  // Messages from nodes that are already decided would have been dropped
  // anyway; commit outputs only after every node has acted.
  for (NodeId i = 0; i < n; ++i) {
    if (pending_[i]) commit_output(i, *pending_[i]);
  }
  deliver();
  ++round_;
  if (!config_.deviations.empty() && !detected_) note_detection();
}

RunRecord Simulation::finish() {
  RunRecord rec;
  rec.seed = config_.master_seed;
  rec.protocol = config_.protocol;
  rec.terminated = undecided_ == 0;
  rec.rounds_used = round_;
  const std::uint64_t k = rounds_per_iteration(config_.protocol);
  rec.iterations_used = (round_ + k - 1) / k;
  rec.outputs = outputs_;
  rec.decided_round = decided_round_;
  const std::size_t n = outputs_.size();
  if (rec.terminated) {
    std::vector<double> payoff(n);
    for (NodeId i = 0; i < n; ++i) payoff[i] = payoff_of(config_, i);
    rec.utilities = evaluate_all(*config_.graph, outputs_, payoff);
  } else {
    rec.utilities.assign(n, UtilityValue::finite(0.0));
  }
  rec.cheat_flags.resize(n);
  for (NodeId i = 0; i < n; ++i) rec.cheat_flags[i] = strategies_[i]->been_cheated() ? 1 : 0;
  rec.trace = std::move(trace_);
  for (const auto& d : config_.deviations) {
    const auto& b = *behavior_[d.node];
    rec.deviations.push_back(DeviationOutcome{d, b.fired(), b.fired_round(), detected_});
  }
  return rec;
}

RunRecord run(const RunConfig& config, const RoundObserver& observer) {
  Simulation sim(config);
  while (!sim.finished()) {
    sim.step_round();
    if (observer) observer(sim);
  }
  return sim.finish();
}

}  // namespace rmis
