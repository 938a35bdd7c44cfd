#include "rmis/deviations.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "rmis/errors.hpp"

namespace rmis {

namespace {

struct KindName {
  DeviationKind kind;
  std::string_view name;
};

constexpr std::array<KindName, 9> kKindNames{{
    {DeviationKind::BiasedMoves, "biased_moves"},
    {DeviationKind::Silent, "silent"},
    {DeviationKind::GarbageSender, "garbage"},
    {DeviationKind::EarlyOne, "early_one"},
    {DeviationKind::EarlyZero, "early_zero"},
    {DeviationKind::EarlyBot, "early_bot"},
    {DeviationKind::BiasedRand, "biased_rand"},
    {DeviationKind::StaleForward, "stale_forward"},
    {DeviationKind::WrongForward, "wrong_forward"},
}};

std::uint64_t parse_uint(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError("deviation: " + std::string(key) + " must be a non-negative integer, got '" +
                      std::string(v) + "'");
  }
  return out;
}

double parse_double(std::string_view v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(std::string(v), &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw ConfigError("deviation: bad parameter '" + std::string(v) + "'");
  }
}

// Biased draw over the three moves from a cumulative distribution.
class BiasedMoveSource final : public RandomSource {
 public:
  BiasedMoveSource(PrfRandom base, std::array<double, 3> p, std::uint64_t from_round)
      : base_(base), p_(p), from_(from_round) {}

  Move move(std::uint64_t round, NodeId against) override {
    if (round < from_) return base_.move(round, against);
    const double u = unit_double(base_.word(round, Purpose::BitBias, against));
    const double total = p_[0] + p_[1] + p_[2];
    if (u * total < p_[0]) return Move::Rock;
    if (u * total < p_[0] + p_[1]) return Move::Paper;
    return Move::Scissors;
  }
  std::size_t opponent_index(std::uint64_t round, std::size_t c) override {
    return base_.opponent_index(round, c);
  }
  RankBits self_bits(std::uint64_t round, std::uint32_t l) override { return base_.self_bits(round, l); }
  RankBits pair_bits(std::uint64_t round, NodeId r, std::uint32_t l) override {
    return base_.pair_bits(round, r, l);
  }

 private:
  PrfRandom base_;
  std::array<double, 3> p_;
  std::uint64_t from_;
};

// Each bit is 1 independently with a fixed probability.
class BiasedBitSource final : public RandomSource {
 public:
  BiasedBitSource(PrfRandom base, double p_self, double p_pair, std::uint64_t from_round)
      : base_(base), p_self_(p_self), p_pair_(p_pair), from_(from_round) {}

  Move move(std::uint64_t round, NodeId against) override { return base_.move(round, against); }
  std::size_t opponent_index(std::uint64_t round, std::size_t c) override {
    return base_.opponent_index(round, c);
  }
  RankBits self_bits(std::uint64_t round, std::uint32_t l) override {
    if (round < from_) return base_.self_bits(round, l);
    return draw(round, 0, p_self_, l);
  }
  RankBits pair_bits(std::uint64_t round, NodeId r, std::uint32_t l) override {
    if (round < from_) return base_.pair_bits(round, r, l);
    return draw(round, std::uint64_t{r} + 1, p_pair_, l);
  }

 private:
  RankBits draw(std::uint64_t round, std::uint64_t stream, double p, std::uint32_t l) const {
    RankBits out{0, l};
    for (std::uint32_t b = 0; b < l; ++b) {
      const double u = unit_double(base_.word(round, Purpose::BitBias, (stream << 8) | b));
      if (u < p) out.value |= 1ULL << b;
    }
    return out;
  }

  PrfRandom base_;
  double p_self_;
  double p_pair_;
  std::uint64_t from_;
};

bool has_undecided_neighbor(const Observation& obs) {
  return obs.neighbor_outputs.any_undecided();
}

}  // namespace

std::string_view to_string(DeviationKind kind) {
  for (const auto& kn : kKindNames) {
    if (kn.kind == kind) return kn.name;
  }
  return "?";
}

DeviationKind parse_deviation_kind(std::string_view name) {
  for (const auto& kn : kKindNames) {
    if (kn.name == name) return kn.kind;
  }
  if (name == "garbage_sender") return DeviationKind::GarbageSender;
  throw ConfigError("unknown deviation strategy '" + std::string(name) + "'");
}

bool detectable(DeviationKind kind) {
  switch (kind) {
    case DeviationKind::Silent:
    case DeviationKind::GarbageSender:
    case DeviationKind::EarlyOne:
    case DeviationKind::StaleForward:
    case DeviationKind::WrongForward:
      return true;
    default:
      return false;
  }
}

bool applicable(DeviationKind kind, Protocol protocol) {
  switch (kind) {
    case DeviationKind::BiasedMoves:
      return protocol == Protocol::Rps;
    case DeviationKind::BiasedRand:
    case DeviationKind::StaleForward:
    case DeviationKind::WrongForward:
      return protocol == Protocol::Rank;
    default:
      return true;
  }
}

std::vector<DeviationKind> catalog(Protocol protocol) {
  std::vector<DeviationKind> out;
  for (const auto& kn : kKindNames) {
    if (applicable(kn.kind, protocol)) out.push_back(kn.kind);
  }
  return out;
}

DeviationSpec parse_deviation(std::string_view text) {
  DeviationSpec spec;
  bool have_node = false;
  bool have_kind = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string_view item = text.substr(pos, comma - pos);
    pos = comma + 1;
    if (item.empty()) continue;
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) throw ConfigError("deviation: expected key=value, got '" + std::string(item) + "'");
    const std::string_view key = item.substr(0, eq);
    const std::string_view value = item.substr(eq + 1);
    if (key == "node") {
      spec.node = static_cast<NodeId>(parse_uint(key, value));
      have_node = true;
    } else if (key == "strategy") {
      spec.kind = parse_deviation_kind(value);
      have_kind = true;
    } else if (key == "activation") {
      spec.activation_round = parse_uint(key, value);
    } else if (key == "params") {
      spec.params.clear();
      std::size_t p = 0;
      while (p <= value.size()) {
        const std::size_t colon = std::min(value.find(':', p), value.size());
        spec.params.push_back(parse_double(value.substr(p, colon - p)));
        p = colon + 1;
      }
    } else {
      throw ConfigError("deviation: unknown key '" + std::string(key) + "'");
    }
  }
  if (!have_node || !have_kind) throw ConfigError("deviation: node and strategy are required");
  resolved_params(spec);
  return spec;
}

std::string format_deviation(const DeviationSpec& spec) {
  std::ostringstream os;
  os.precision(17);
  os << "node=" << spec.node << ",strategy=" << to_string(spec.kind);
  if (!spec.params.empty()) {
    os << ",params=";
    for (std::size_t i = 0; i < spec.params.size(); ++i) os << (i ? ":" : "") << spec.params[i];
  }
  if (spec.activation_round != 0) os << ",activation=" << spec.activation_round;
  return os.str();
}

std::vector<double> resolved_params(const DeviationSpec& spec) {
  auto probability = [](double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; };
  switch (spec.kind) {
    case DeviationKind::BiasedMoves: {
      std::vector<double> p = spec.params.empty() ? std::vector<double>{1.0, 0.0, 0.0} : spec.params;
      if (p.size() != 3 || !std::all_of(p.begin(), p.end(), [](double x) { return std::isfinite(x) && x >= 0.0; }) ||
          p[0] + p[1] + p[2] <= 0.0) {
        throw ConfigError("biased_moves needs three non-negative weights with a positive sum");
      }
      return p;
    }
    case DeviationKind::BiasedRand: {
      std::vector<double> p = spec.params.empty() ? std::vector<double>{0.0, 1.0} : spec.params;
      if (p.size() != 2 || !probability(p[0]) || !probability(p[1])) {
        throw ConfigError("biased_rand needs two probabilities in [0, 1]");
      }
      return p;
    }
    default:
      if (!spec.params.empty()) {
        throw ConfigError("strategy " + std::string(to_string(spec.kind)) + " takes no params");
      }
      return {};
  }
}

void check_deviation(const DeviationSpec& spec, Protocol protocol, std::size_t n) {
  if (!applicable(spec.kind, protocol)) {
    throw ConfigError("deviation " + std::string(to_string(spec.kind)) + " does not apply to protocol " +
                      std::string(to_string(protocol)));
  }
  if (spec.node >= n) throw ConfigError("deviation node out of range");
  resolved_params(spec);
}

DeviationBehavior::DeviationBehavior(DeviationSpec spec, std::uint64_t seed, std::size_t garbage_bytes)
    : spec_(std::move(spec)), params_(resolved_params(spec_)), seed_(seed), garbage_bytes_(garbage_bytes) {}

std::unique_ptr<RandomSource> DeviationBehavior::make_random() const {
  PrfRandom base(seed_, spec_.node);
  switch (spec_.kind) {
    case DeviationKind::BiasedMoves:
      return std::make_unique<BiasedMoveSource>(base, std::array<double, 3>{params_[0], params_[1], params_[2]},
                                                spec_.activation_round);
    case DeviationKind::BiasedRand:
      return std::make_unique<BiasedBitSource>(base, params_[0], params_[1], spec_.activation_round);
    default:
      return std::make_unique<PrfRandom>(base);
  }
}

Payload DeviationBehavior::garbage(std::uint64_t round, std::size_t index) const {
  Garbage g;
  g.bytes.resize(garbage_bytes_);
  std::uint64_t w = 0;
  for (std::size_t b = 0; b < garbage_bytes_; ++b) {
    if (b % 8 == 0) w = prf(seed_, spec_.node, round, Purpose::Garbage, (index << 16) | (b / 8));
    g.bytes[b] = static_cast<std::uint8_t>(w >> (8 * (b % 8)));
  }
  return g;
}

void DeviationBehavior::remember_pair_rands(const Observation& obs) {
  for (const Message* m : obs.inbox) {
    const auto* p = std::get_if<PairRand>(&m->payload);
    if (p && p->to == spec_.node) received_.push_back(*p);
  }
}

void DeviationBehavior::apply(const Observation& obs, const Action& honest, Action& actual) {
  if (spec_.kind == DeviationKind::StaleForward) remember_pair_rands(obs);
  actual = honest;
  if (obs.round < spec_.activation_round) return;

  switch (spec_.kind) {
    case DeviationKind::BiasedMoves:
    case DeviationKind::BiasedRand:
      // The bias lives in the random source; it matters once draws are made.
      if (!honest.outbound.empty() && has_undecided_neighbor(obs) && !fired_round_) fired_round_ = obs.round;
      return;
    case DeviationKind::Silent:
      actual.outbound.clear();
      break;
    case DeviationKind::GarbageSender:
      for (std::size_t k = 0; k < actual.outbound.size(); ++k) {
        actual.outbound[k].payload = garbage(obs.round, k);
      }
      break;
    case DeviationKind::EarlyOne:
      if (honest.output != OutputValue::One) {
        actual.outbound.clear();
        actual.output = OutputValue::One;
      }
      break;
    case DeviationKind::EarlyZero:
      actual.outbound.clear();
      actual.output = OutputValue::Zero;
      break;
    case DeviationKind::EarlyBot:
      actual.outbound.clear();
      actual.output = OutputValue::Bot;
      break;
    case DeviationKind::StaleForward:
      for (Message& m : actual.outbound) {
        auto* f = std::get_if<ForwardedPairRand>(&m.payload);
        if (!f) continue;
        const PairRand* older = nullptr;
        for (const PairRand& p : received_) {
          if (p.iteration < f->iteration) older = &p;
        }
        if (older) {
          *f = ForwardedPairRand{older->iteration, older->from, older->bits, older->sig};
        } else {
          f->iteration -= 1;
        }
      }
      break;
    case DeviationKind::WrongForward:
      for (Message& m : actual.outbound) {
        if (auto* f = std::get_if<ForwardedPairRand>(&m.payload)) f->bits.value ^= 1;
      }
      break;
  }
  if (!fired_round_ && !(actual == honest) && has_undecided_neighbor(obs)) fired_round_ = obs.round;
}

}  // namespace rmis
