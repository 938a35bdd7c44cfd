#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "rmis/deviations.hpp"
#include "rmis/graph.hpp"
#include "rmis/signing.hpp"
#include "rmis/strategy.hpp"
#include "rmis/utility.hpp"

namespace rmis {

// Which implementation honest nodes run: the full strategy with all deviation
// handling, or the stripped honest-execution reference.
enum class Variant { Full, Honest };

struct RunConfig {
  std::shared_ptr<const Graph> graph;
  Protocol protocol = Protocol::Rps;
  std::uint64_t master_seed = 0;
  std::uint64_t round_cap = 0;      // 0: protocol default
  std::uint32_t rank_bits = 0;      // 0: ceil(rank_bits_c * log2 n)
  double rank_bits_c = 3.0;
  std::vector<double> payoff;       // empty: 1 everywhere; one entry: shared by all nodes
  std::vector<DeviationSpec> deviations;
  bool record_trace = false;
  Variant variant = Variant::Full;
  SignatureBackend signatures = SignatureBackend::Ideal;
  std::size_t garbage_bytes = 8;
};

std::uint64_t default_round_cap(Protocol protocol, std::size_t n, std::size_t max_degree);
std::uint64_t effective_round_cap(const RunConfig& config);
std::uint32_t effective_rank_bits(const RunConfig& config);
double payoff_of(const RunConfig& config, NodeId node);

// Throws ConfigError on an unusable configuration.
void validate_config(const RunConfig& config);

struct TraceEntry {
  std::uint64_t round = 0;
  NodeId node = 0;
  Action action;
  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

struct DeviationOutcome {
  DeviationSpec spec;
  bool fired = false;
  std::optional<std::uint64_t> fired_round;
  // Some honest node set BeenCheated or was driven to output bot.
  bool detected = false;
};

struct RunRecord {
  std::uint64_t seed = 0;
  Protocol protocol = Protocol::Rps;
  bool terminated = false;
  std::uint64_t rounds_used = 0;
  std::uint64_t iterations_used = 0;
  std::vector<std::optional<OutputValue>> outputs;
  std::vector<std::optional<std::uint64_t>> decided_round;
  std::vector<UtilityValue> utilities;
  std::vector<char> cheat_flags;
  std::optional<std::vector<TraceEntry>> trace;
  std::vector<DeviationOutcome> deviations;
};

class Simulation {
 public:
  explicit Simulation(RunConfig config);
  ~Simulation();
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  // Collects every undecided node's Action against the same snapshot, then
  // delivers messages and commits outputs.
  void step_round();
  bool finished() const;

  std::uint64_t round() const { return round_; }
  const Graph& graph() const { return *config_.graph; }
  const RunConfig& config() const { return config_; }
  std::span<const std::optional<OutputValue>> outputs() const { return outputs_; }
  const NodeStrategy& strategy(NodeId i) const { return *strategies_[i]; }

  // Throws EngineFault when `node` already has an output.
  void commit_output(NodeId node, OutputValue value);

  RunRecord finish();

 private:
  void build_observation(NodeId i);
  void stamp(NodeId i, Action& a) const;
  void check_addressing(NodeId i, const Action& a) const;
  void note_detection();
  void deliver();

  RunConfig config_;
  std::uint64_t cap_;
  std::uint64_t round_ = 0;
  std::size_t undecided_;
  std::unique_ptr<KeyRegistry> keys_;
  std::vector<std::unique_ptr<NodeStrategy>> strategies_;
  std::vector<std::unique_ptr<RandomSource>> rngs_;
  std::vector<std::unique_ptr<DeviationBehavior>> behavior_;  // indexed by node, mostly null
  std::vector<char> deviator_;
  std::vector<std::optional<OutputValue>> outputs_;
  std::vector<std::optional<OutputValue>> pending_;
  std::vector<std::optional<std::uint64_t>> decided_round_;
  std::vector<Action> current_;
  std::vector<Action> previous_;
  // Messages awaiting each node next round in sender-slot order, with the
  // matching slot numbers alongside.
  std::vector<std::vector<const Message*>> inbox_;
  std::vector<std::vector<std::uint32_t>> inbox_slot_;
  bool detected_ = false;
  std::optional<std::vector<TraceEntry>> trace_;

  // Per-node observation scratch.
  std::vector<std::uint32_t> obs_offsets_;
  Observation obs_;
  Action prescribed_;
};

using RoundObserver = std::function<void(const Simulation&)>;

// Runs to termination or the round cap. The observer, if set, is called after
// every round.
RunRecord run(const RunConfig& config, const RoundObserver& observer = {});

}  // namespace rmis
