#include "rmis/oracle.hpp"

#include <array>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include <boost/multiprecision/cpp_dec_float.hpp>

#include "rmis/errors.hpp"
#include "rmis/rps_protocol.hpp"
#include "rmis/utility.hpp"

namespace rmis {

namespace {

using boost::multiprecision::cpp_int;

enum Status : std::uint8_t { Undecided = 0, Joined = 1, Out = 2 };
using State = std::vector<std::uint8_t>;

struct Transition {
  State next;
  Rational p;
};

struct Values {
  Rational iterations;
  std::vector<Rational> inclusion;
  std::vector<Rational> utility;
};

cpp_int binomial(const cpp_int& m, unsigned b) {
  cpp_int r = 1;
  for (unsigned i = 0; i < b; ++i) r = r * (m - i) / (i + 1);
  return r;
}

class Chain {
 public:
  Chain(const Graph& g, Protocol protocol, std::uint32_t rank_bits, const std::optional<DeviationSpec>& dev)
      : g_(g), protocol_(protocol), n_(g.size()) {
    for (auto& d : move_p_) d = {Rational(1, 3), Rational(1, 3), Rational(1, 3)};
    if (dev) {
      if (protocol != Protocol::Rps || dev->kind != DeviationKind::BiasedMoves) {
        throw ConfigError("the exact oracle supports only biased_moves under rps");
      }
      if (dev->node >= n_) throw ConfigError("deviation node out of range");
      const auto w = resolved_params(*dev);
      const Rational total = Rational(w[0]) + Rational(w[1]) + Rational(w[2]);
      for (int m = 0; m < 3; ++m) move_p_[dev->node][m] = Rational(w[m]) / total;
    }
    space_ = cpp_int(1) << rank_bits;
  }

  std::vector<Transition> step(const State& s) const {
    std::vector<char> active(n_, 0);
    State base = s;
    for (NodeId i = 0; i < n_; ++i) {
      if (s[i] != Undecided) continue;
      bool live = false;
      for (NodeId j : g_.neighbors(i)) live |= s[j] == Undecided;
      if (live) {
        active[i] = 1;
      } else {
        base[i] = Joined;  // nothing left to beat
      }
    }
    std::map<State, Rational> acc;
    auto settle = [&](const std::vector<char>& joins, const Rational& p) {
      State next = base;
      for (NodeId i = 0; i < n_; ++i) {
        if (!joins[i]) continue;
        next[i] = Joined;
        for (NodeId j : g_.neighbors(i)) {
          if (next[j] == Undecided) next[j] = Out;
        }
      }
      acc[next] += p;
    };
    if (protocol_ == Protocol::Rps) {
      enumerate_rps(s, active, settle);
    } else {
      enumerate_rank(s, active, settle);
    }
    std::vector<Transition> out;
    for (auto& [next, p] : acc) out.push_back({next, p});
    return out;
  }

  const Values& solve(const State& s) {
    if (auto it = memo_.find(s); it != memo_.end()) return it->second;
    Values v;
    v.inclusion.assign(n_, 0);
    v.utility.assign(n_, 0);
    bool done = true;
    for (auto st : s) done &= st != Undecided;
    if (done) {
      std::vector<std::optional<OutputValue>> outs(n_);
      for (NodeId i = 0; i < n_; ++i) outs[i] = s[i] == Joined ? OutputValue::One : OutputValue::Zero;
      const auto utils = evaluate_all(g_, outs, std::vector<double>(n_, 1.0));
      for (NodeId i = 0; i < n_; ++i) {
        v.inclusion[i] = s[i] == Joined ? 1 : 0;
        if (utils[i].is_negative_infinity()) throw EngineFault("oracle reached an invalid terminal state");
        v.utility[i] = Rational(utils[i].value());
      }
      return memo_.emplace(s, std::move(v)).first->second;
    }
    Rational stay = 0;
    Rational iters = 1;
    for (const auto& t : step(s)) {
      if (t.next == s) {
        stay += t.p;
        continue;
      }
      const Values& w = solve(t.next);
      iters += t.p * w.iterations;
      for (NodeId i = 0; i < n_; ++i) {
        v.inclusion[i] += t.p * w.inclusion[i];
        v.utility[i] += t.p * w.utility[i];
      }
    }
    if (stay == 1) throw EngineFault("oracle state never leaves itself");
    // Geometric closure of the self-loop.
    const Rational leave = 1 - stay;
    v.iterations = iters / leave;
    for (NodeId i = 0; i < n_; ++i) {
      v.inclusion[i] /= leave;
      v.utility[i] /= leave;
    }
    return memo_.emplace(s, std::move(v)).first->second;
  }

  std::vector<Rational> first_join(const State& s) const {
    std::vector<Rational> p(n_, 0);
    for (const auto& t : step(s)) {
      for (NodeId i = 0; i < n_; ++i) {
        if (s[i] == Undecided && t.next[i] == Joined) p[i] += t.p;
      }
    }
    return p;
  }

 private:
  template <typename Settle>
  void enumerate_rps(const State& s, const std::vector<char>& active, Settle& settle) const {
    std::vector<std::pair<NodeId, NodeId>> arcs;
    for (NodeId i = 0; i < n_; ++i) {
      if (!active[i]) continue;
      for (NodeId j : g_.neighbors(i)) {
        if (s[j] == Undecided) arcs.push_back({i, j});
      }
    }
    std::vector<int> moves(arcs.size(), 0);
    const std::size_t total = static_cast<std::size_t>(std::pow(3, arcs.size()));
    for (std::size_t code = 0; code < total; ++code) {
      std::size_t c = code;
      Rational p = 1;
      for (std::size_t a = 0; a < arcs.size(); ++a) {
        moves[a] = static_cast<int>(c % 3);
        c /= 3;
        p *= move_p_[arcs[a].first][moves[a]];
      }
      if (p == 0) continue;
      auto move_on = [&](NodeId from, NodeId to) {
        for (std::size_t a = 0; a < arcs.size(); ++a) {
          if (arcs[a].first == from && arcs[a].second == to) return static_cast<Move>(moves[a]);
        }
        return Move::Rock;
      };
      std::vector<char> joins(n_, 0);
      for (NodeId i = 0; i < n_; ++i) {
        if (!active[i]) continue;
        bool all = true;
        for (NodeId j : g_.neighbors(i)) {
          if (s[j] != Undecided) continue;
          all &= rps_outcome(move_on(i, j), move_on(j, i)) == RpsResult::IWins;
        }
        joins[i] = all;
      }
      settle(joins, p);
    }
  }

  template <typename Settle>
  void enumerate_rank(const State&, const std::vector<char>& active, Settle& settle) const {
    std::vector<NodeId> nodes;
    for (NodeId i = 0; i < n_; ++i) {
      if (active[i]) nodes.push_back(i);
    }
    const std::size_t k = nodes.size();
    if (k == 0) {
      settle(std::vector<char>(n_, 0), Rational(1));
      return;
    }
    const cpp_int denom = boost::multiprecision::pow(space_, static_cast<unsigned>(k));
    std::vector<std::size_t> level(k, 0);
    std::size_t total = 1;
    for (std::size_t a = 0; a < k; ++a) total *= k;
    for (std::size_t code = 0; code < total; ++code) {
      std::size_t c = code;
      for (std::size_t a = 0; a < k; ++a) {
        level[a] = c % k;
        c /= k;
      }
      // Keep only orderings whose levels are exactly 0..b-1.
      std::vector<char> used(k, 0);
      for (auto l : level) used[l] = 1;
      std::size_t b = 0;
      while (b < k && used[b]) ++b;
      bool contiguous = true;
      for (std::size_t l = b; l < k; ++l) contiguous &= !used[l];
      if (!contiguous) continue;
      const cpp_int ways = binomial(space_, static_cast<unsigned>(b));
      if (ways == 0) continue;
      std::vector<char> joins(n_, 0);
      for (std::size_t a = 0; a < k; ++a) {
        bool lowest = true;
        for (std::size_t b2 = 0; b2 < k; ++b2) {
          if (b2 != a && g_.adjacent(nodes[a], nodes[b2])) lowest &= level[a] < level[b2];
        }
        joins[nodes[a]] = lowest;
      }
      settle(joins, Rational(ways, denom));
    }
  }

  const Graph& g_;
  Protocol protocol_;
  std::size_t n_;
  std::array<std::array<Rational, 3>, 3> move_p_;
  cpp_int space_;
  std::map<State, Values> memo_;
};

}  // namespace

OracleResult exact_small_oracle(const Graph& g, Protocol protocol, std::uint32_t rank_bits,
                                const std::optional<DeviationSpec>& deviation) {
  if (g.size() == 0 || g.size() > 3) throw ConfigError("exact oracle supports 1 to 3 nodes");
  if (rank_bits < 1 || rank_bits > 64) throw ConfigError("rank bits must be in [1, 64]");
  Chain chain(g, protocol, rank_bits, deviation);
  const State start(g.size(), Undecided);
  OracleResult r;
  const auto& v = chain.solve(start);
  r.inclusion = v.inclusion;
  r.expected_utility = v.utility;
  r.expected_iterations = v.iterations;
  r.first_iteration_join = chain.first_join(start);
  return r;
}

std::string to_decimal(const Rational& r, int digits) {
  using boost::multiprecision::cpp_dec_float_50;
  const cpp_dec_float_50 num(boost::multiprecision::numerator(r));
  const cpp_dec_float_50 den(boost::multiprecision::denominator(r));
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << cpp_dec_float_50(num / den);
  return os.str();
}

}  // namespace rmis
