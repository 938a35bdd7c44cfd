#include "rmis/analysis.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <optional>
#include <ostream>

#include "rmis/errors.hpp"
#include "rmis/rank_protocol.hpp"

namespace rmis {

namespace {

// Evaluates produce(k) for k in [0, count) on `threads` workers and feeds the
// results to consume() in index order. Memory stays bounded by the chunk.
template <typename T, typename Produce, typename Consume>
void ordered_map(std::uint64_t count, int threads, Produce&& produce, Consume&& consume) {
  const std::uint64_t chunk = std::max<std::uint64_t>(64, 16ULL * static_cast<std::uint64_t>(threads));
  std::vector<std::optional<T>> results(std::min(chunk, count));
  std::vector<std::exception_ptr> errors(results.size());
  for (std::uint64_t start = 0; start < count; start += chunk) {
    const auto len = static_cast<std::int64_t>(std::min(chunk, count - start));
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::int64_t k = 0; k < len; ++k) {
      try {
        results[k].emplace(produce(start + static_cast<std::uint64_t>(k)));
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
    for (std::int64_t k = 0; k < len; ++k) {
      if (errors[k]) std::rethrow_exception(errors[k]);
      consume(*results[k]);
      results[k].reset();
    }
  }
}

template <typename T, typename Produce, typename Consume>
void ordered_map_serial(std::uint64_t count, Produce&& produce, Consume&& consume) {
  for (std::uint64_t k = 0; k < count; ++k) {
    T value = produce(k);
    consume(value);
  }
}

RunConfig with_seed(const RunConfig& config, std::uint64_t seed) {
  RunConfig c = config;
  c.master_seed = seed;
  return c;
}

double quantile_nearest_rank(const std::vector<std::uint64_t>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
  return static_cast<double>(sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1]);
}

double median_of(const std::vector<std::uint64_t>& sorted) {
  if (sorted.empty()) return 0.0;
  const std::size_t m = sorted.size() / 2;
  if (sorted.size() % 2 == 1) return static_cast<double>(sorted[m]);
  return 0.5 * static_cast<double>(sorted[m - 1] + sorted[m]);
}

std::vector<NodeId> one_set(const RunRecord& rec) {
  std::vector<NodeId> s;
  for (NodeId i = 0; i < rec.outputs.size(); ++i) {
    if (rec.outputs[i] == OutputValue::One) s.push_back(i);
  }
  return s;
}

}  // namespace

int resolve_jobs(int jobs) { return jobs > 0 ? jobs : omp_get_max_threads(); }

void for_each_run(const RunConfig& config, std::uint64_t trials, std::uint64_t seed_base, int jobs,
                  const std::function<void(const RunRecord&)>& sink) {
  validate_config(config);
  ordered_map<RunRecord>(
      trials, resolve_jobs(jobs), [&](std::uint64_t k) { return run(with_seed(config, seed_base + k)); },
      [&](const RunRecord& r) { sink(r); });
}

void for_each_run_serial(const RunConfig& config, std::uint64_t trials, std::uint64_t seed_base,
                         const std::function<void(const RunRecord&)>& sink) {
  validate_config(config);
  ordered_map_serial<RunRecord>(
      trials, [&](std::uint64_t k) { return run(with_seed(config, seed_base + k)); },
      [&](const RunRecord& r) { sink(r); });
}

SummaryBuilder::SummaryBuilder(const Graph& g)
    : graph_(&g),
      ones_(g.size(), 0),
      utility_sum_(g.size(), 0.0),
      utility_comp_(g.size(), 0.0),
      utility_n_(g.size(), 0) {}

void SummaryBuilder::add(const RunRecord& rec) {
  ++trials_;
  if (rec.terminated) {
    ++terminated_;
    iterations_.push_back(rec.iterations_used);
    if (!is_maximal_independent_set(*graph_, one_set(rec))) ++mis_failures_;
  }
  for (NodeId i = 0; i < rec.outputs.size(); ++i) {
    if (rec.outputs[i] == OutputValue::One) ++ones_[i];
    if (rec.outputs[i] == OutputValue::Bot) ++bots_;
    if (rec.cheat_flags[i]) ++cheats_;
    const UtilityValue& u = rec.utilities[i];
    if (u.is_negative_infinity()) {
      ++neg_inf_;
      continue;
    }
    // Kahan summation; records arrive in seed order, so the result is
    // reproducible regardless of thread count.
    const double y = u.value() - utility_comp_[i];
    const double t = utility_sum_[i] + y;
    utility_comp_[i] = (t - utility_sum_[i]) - y;
    utility_sum_[i] = t;
    ++utility_n_[i];
  }
}

TrialSummary SummaryBuilder::build() const {
  TrialSummary s;
  s.trials = trials_;
  s.terminated_fraction = trials_ ? static_cast<double>(terminated_) / static_cast<double>(trials_) : 0.0;
  std::vector<std::uint64_t> sorted = iterations_;
  std::sort(sorted.begin(), sorted.end());
  if (!sorted.empty()) {
    long double total = 0;
    for (auto v : sorted) total += v;
    s.iterations.mean = static_cast<double>(total / sorted.size());
    s.iterations.median = median_of(sorted);
    s.iterations.p95 = quantile_nearest_rank(sorted, 0.95);
    s.iterations.max = sorted.back();
  }
  const std::size_t n = ones_.size();
  s.inclusion_frequency.resize(n);
  s.mean_finite_utility.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.inclusion_frequency[i] = trials_ ? static_cast<double>(ones_[i]) / static_cast<double>(trials_) : 0.0;
    s.mean_finite_utility[i] = utility_n_[i] ? utility_sum_[i] / static_cast<double>(utility_n_[i]) : 0.0;
  }
  s.bot_count = bots_;
  s.neg_inf_count = neg_inf_;
  s.cheat_count = cheats_;
  s.mis_failures = mis_failures_;
  return s;
}

TrialSummary run_trials(const RunConfig& config, std::uint64_t trials, std::uint64_t seed_base, int jobs) {
  if (trials == 0) throw ConfigError("trials must be at least 1");
  SummaryBuilder b(*config.graph);
  for_each_run(config, trials, seed_base, jobs, [&](const RunRecord& r) { b.add(r); });
  return b.build();
}

TrialSummary run_trials_serial(const RunConfig& config, std::uint64_t trials, std::uint64_t seed_base) {
  if (trials == 0) throw ConfigError("trials must be at least 1");
  SummaryBuilder b(*config.graph);
  for_each_run_serial(config, trials, seed_base, [&](const RunRecord& r) { b.add(r); });
  return b.build();
}

nlohmann::json summary_to_json(const TrialSummary& s) {
  return {{"trials", s.trials},
          {"terminated_fraction", s.terminated_fraction},
          {"iterations",
           {{"mean", s.iterations.mean},
            {"median", s.iterations.median},
            {"p95", s.iterations.p95},
            {"max", s.iterations.max}}},
          {"inclusion_frequency", s.inclusion_frequency},
          {"bot_count", s.bot_count},
          {"neg_inf_count", s.neg_inf_count},
          {"cheat_count", s.cheat_count},
          {"mis_failures", s.mis_failures},
          {"mean_finite_utility", s.mean_finite_utility}};
}

std::string summary_csv_header(std::size_t n) {
  std::string h =
      "trials,terminated_fraction,iter_mean,iter_median,iter_p95,iter_max,bot_count,neg_inf_count,"
      "cheat_count,mis_failures";
  for (std::size_t i = 0; i < n; ++i) h += ",inclusion_" + std::to_string(i);
  return h;
}

void write_summary_csv_row(std::ostream& os, const TrialSummary& s) {
  os << s.trials << ',' << s.terminated_fraction << ',' << s.iterations.mean << ',' << s.iterations.median
     << ',' << s.iterations.p95 << ',' << s.iterations.max << ',' << s.bot_count << ',' << s.neg_inf_count
     << ',' << s.cheat_count << ',' << s.mis_failures;
  for (double f : s.inclusion_frequency) os << ',' << f;
  os << '\n';
}

PairedComparison paired_deviation_test(const RunConfig& config, const DeviationSpec& spec,
                                       std::uint64_t trials, std::uint64_t seed_base, int jobs) {
  if (trials == 0) throw ConfigError("trials must be at least 1");
  RunConfig honest = config;
  honest.deviations.clear();
  honest.record_trace = false;
  RunConfig deviant = honest;
  deviant.deviations = {spec};
  validate_config(honest);
  validate_config(deviant);

  struct Pair {
    UtilityValue honest;
    UtilityValue deviant;
    bool fired;
    bool detected;
    bool terminated;
  };

  PairedComparison c;
  c.node = spec.node;
  double mean = 0.0, m2 = 0.0, hsum = 0.0, dsum = 0.0;
  const bool detectable_kind = detectable(spec.kind);
  ordered_map<Pair>(
      trials, resolve_jobs(jobs),
      [&](std::uint64_t k) {
        const std::uint64_t seed = seed_base + k;
        const RunRecord h = run(with_seed(honest, seed));
        const RunRecord d = run(with_seed(deviant, seed));
        return Pair{h.utilities[spec.node], d.utilities[spec.node], d.deviations.front().fired,
                    d.deviations.front().detected, h.terminated && d.terminated};
      },
      [&](const Pair& p) {
        ++c.trials;
        if (!p.terminated) ++c.unterminated_runs;
        if (p.fired) ++c.fired_runs;
        if (p.detected) ++c.detected_runs;
        if (p.fired && detectable_kind && p.deviant > UtilityValue::finite(0.0)) ++c.fired_positive_runs;
        if (p.honest.is_negative_infinity()) ++c.honest_neg_inf_runs;
        if (p.deviant.is_negative_infinity()) ++c.neg_inf_runs;
        if (p.honest.is_negative_infinity() || p.deviant.is_negative_infinity()) return;
        // Welford over paired differences.
        ++c.finite_pairs;
        const double diff = p.deviant.value() - p.honest.value();
        const double delta = diff - mean;
        mean += delta / static_cast<double>(c.finite_pairs);
        m2 += delta * (diff - mean);
        hsum += p.honest.value();
        dsum += p.deviant.value();
      });
  if (c.finite_pairs > 0) {
    const double fp = static_cast<double>(c.finite_pairs);
    c.honest_mean = hsum / fp;
    c.deviant_mean = dsum / fp;
    c.mean_difference = mean;
    c.std_err = c.finite_pairs > 1 ? std::sqrt(m2 / (fp - 1.0) / fp) : 0.0;
  }
  return c;
}

nlohmann::json comparison_to_json(const PairedComparison& c) {
  return {{"trials", c.trials},
          {"node", c.node},
          {"honest_mean", c.honest_mean},
          {"deviant_mean", c.deviant_mean},
          {"mean_difference", c.mean_difference},
          {"std_err", c.std_err},
          {"finite_pairs", c.finite_pairs},
          {"neg_inf_runs", c.neg_inf_runs},
          {"honest_neg_inf_runs", c.honest_neg_inf_runs},
          {"detected_runs", c.detected_runs},
          {"fired_runs", c.fired_runs},
          {"fired_positive_runs", c.fired_positive_runs},
          {"unterminated_runs", c.unterminated_runs},
          {"non_profitable", c.non_profitable()}};
}

std::vector<CurvePoint> termination_curve(const FamilySpec& family, const std::vector<std::size_t>& n_list,
                                          Protocol protocol, std::uint64_t trials, std::uint64_t seed_base,
                                          int jobs) {
  std::vector<CurvePoint> out;
  for (std::size_t n : n_list) {
    FamilySpec f = family;
    f.n = n;
    RunConfig config;
    config.graph = std::make_shared<const Graph>(make_family(f));
    config.protocol = protocol;
    const TrialSummary s = run_trials(config, trials, seed_base, jobs);
    out.push_back(CurvePoint{n, s.iterations.median, s.iterations.p95, s.iterations.mean, s.terminated_fraction});
  }
  return out;
}

std::string curve_csv_header() { return "n,median_iterations,p95_iterations,mean_iterations,terminated_fraction"; }

void write_curve_csv_row(std::ostream& os, const CurvePoint& p) {
  os << p.n << ',' << p.median << ',' << p.p95 << ',' << p.mean << ',' << p.terminated_fraction << '\n';
}

JoinCounts join_counts(const Graph& g, const RunRecord& rec, std::size_t degree) {
  const std::uint64_t k_rounds = rounds_per_iteration(rec.protocol);
  const std::uint64_t join_offset = rec.protocol == Protocol::Rps ? 1 : 3;
  std::vector<char> deviator(g.size(), 0);
  for (const auto& d : rec.deviations) deviator[d.spec.node] = 1;
  auto undecided_at = [&](NodeId i, std::uint64_t round) {
    return !rec.decided_round[i] || *rec.decided_round[i] >= round;
  };
  JoinCounts c;
  for (std::uint64_t start = 0; start + join_offset < rec.rounds_used; start += k_rounds) {
    for (NodeId i = 0; i < g.size(); ++i) {
      if (deviator[i] || !undecided_at(i, start)) continue;
      std::size_t live = 0;
      for (NodeId j : g.neighbors(i)) live += undecided_at(j, start) ? 1 : 0;
      if (live != degree) continue;
      ++c.attempts;
      if (rec.decided_round[i] == start + join_offset && rec.outputs[i] == OutputValue::One) ++c.joins;
    }
  }
  return c;
}

TieSurvey rank_tie_survey(const RunConfig& config, std::uint64_t trials, std::uint64_t seed_base, int jobs) {
  if (config.protocol != Protocol::Rank || config.variant != Variant::Full) {
    throw ConfigError("tie survey needs the full rank protocol");
  }
  validate_config(config);
  struct PerRun {
    std::uint64_t iterations = 0;
    std::uint64_t tie_pairs = 0;
    std::uint64_t tied_iterations = 0;
    bool terminated = false;
  };
  TieSurvey survey;
  survey.rank_bits = effective_rank_bits(config);
  ordered_map<PerRun>(
      trials, resolve_jobs(jobs),
      [&](std::uint64_t k) {
        PerRun pr;
        std::vector<std::uint64_t> ranks;
        const RunRecord rec = run(with_seed(config, seed_base + k), [&](const Simulation& sim) {
          // Ranks are fixed once the forwarding round has been processed.
          if (sim.round() % 5 != 3) return;
          ranks.clear();
          for (NodeId i = 0; i < sim.graph().size(); ++i) {
            if (sim.outputs()[i]) continue;
            const auto* s = dynamic_cast<const RankStrategy*>(&sim.strategy(i));
            if (s && s->opponent()) ranks.push_back(s->rank().value);
          }
          if (ranks.empty()) return;
          ++pr.iterations;
          std::sort(ranks.begin(), ranks.end());
          std::uint64_t pairs = 0;
          for (std::size_t a = 0; a < ranks.size();) {
            std::size_t b = a;
            while (b < ranks.size() && ranks[b] == ranks[a]) ++b;
            const std::uint64_t m = b - a;
            pairs += m * (m - 1) / 2;
            a = b;
          }
          pr.tie_pairs += pairs;
          if (pairs) ++pr.tied_iterations;
        });
        pr.terminated = rec.terminated;
        return pr;
      },
      [&](const PerRun& pr) {
        ++survey.runs;
        survey.iterations += pr.iterations;
        survey.tie_pairs += pr.tie_pairs;
        survey.tied_iterations += pr.tied_iterations;
        if (pr.tied_iterations) {
          ++survey.tied_runs;
          if (pr.terminated) ++survey.tied_runs_terminated;
        }
      });
  return survey;
}

}  // namespace rmis
