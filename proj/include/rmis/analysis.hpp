#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "rmis/engine.hpp"

namespace rmis {

struct IterationStats {
  double mean = 0.0;
  double median = 0.0;
  double p95 = 0.0;
  std::uint64_t max = 0;
};

struct TrialSummary {
  std::uint64_t trials = 0;
  double terminated_fraction = 0.0;
  IterationStats iterations;  // over terminated runs
  std::vector<double> inclusion_frequency;
  std::uint64_t bot_count = 0;       // bot outputs across all runs
  std::uint64_t neg_inf_count = 0;   // -inf utilities across all runs
  std::uint64_t cheat_count = 0;     // BeenCheated flags across all runs
  std::uint64_t mis_failures = 0;    // terminated runs whose One-set is not an MIS
  std::vector<double> mean_finite_utility;
};

// Number of worker threads for `jobs` (0: OpenMP default).
int resolve_jobs(int jobs);

// Runs seeds seed_base .. seed_base + trials - 1 and hands each record to
// `sink` in seed order, whatever order the workers finish in. The first
// exception thrown by a trial (in seed order) is rethrown.
void for_each_run(const RunConfig& config, std::uint64_t trials, std::uint64_t seed_base, int jobs,
                  const std::function<void(const RunRecord&)>& sink);
void for_each_run_serial(const RunConfig& config, std::uint64_t trials, std::uint64_t seed_base,
                         const std::function<void(const RunRecord&)>& sink);

// Order-independent accumulator behind TrialSummary.
class SummaryBuilder {
 public:
  explicit SummaryBuilder(const Graph& g);
  void add(const RunRecord& rec);
  TrialSummary build() const;

 private:
  const Graph* graph_;
  std::uint64_t trials_ = 0;
  std::uint64_t terminated_ = 0;
  std::vector<std::uint64_t> iterations_;
  std::vector<std::uint64_t> ones_;
  std::vector<double> utility_sum_;
  std::vector<double> utility_comp_;
  std::vector<std::uint64_t> utility_n_;
  std::uint64_t bots_ = 0;
  std::uint64_t neg_inf_ = 0;
  std::uint64_t cheats_ = 0;
  std::uint64_t mis_failures_ = 0;
};

TrialSummary run_trials(const RunConfig& config, std::uint64_t trials, std::uint64_t seed_base, int jobs = 0);
TrialSummary run_trials_serial(const RunConfig& config, std::uint64_t trials, std::uint64_t seed_base);

nlohmann::json summary_to_json(const TrialSummary& s);
// Columns: trials, terminated_fraction, iter_mean, iter_median, iter_p95,
// iter_max, bot_count, neg_inf_count, cheat_count, mis_failures, then
// inclusion_<i> for every node.
std::string summary_csv_header(std::size_t n);
void write_summary_csv_row(std::ostream& os, const TrialSummary& s);

struct PairedComparison {
  std::uint64_t trials = 0;
  NodeId node = 0;
  // Means over the runs in which the deviator's utility stayed finite.
  double honest_mean = 0.0;
  double deviant_mean = 0.0;
  double mean_difference = 0.0;  // deviant minus honest, paired per seed
  double std_err = 0.0;          // of mean_difference
  std::uint64_t finite_pairs = 0;
  std::uint64_t neg_inf_runs = 0;         // deviant runs with -inf deviator utility
  std::uint64_t honest_neg_inf_runs = 0;  // baseline runs with -inf deviator utility
  std::uint64_t detected_runs = 0;
  std::uint64_t fired_runs = 0;
  // Detectable deviation fired yet the deviator ended with positive utility.
  std::uint64_t fired_positive_runs = 0;
  std::uint64_t unterminated_runs = 0;

  // Deviation is no better than honest play within two standard errors, and
  // the baseline never falls to -inf. A deviant distribution that reaches
  // -inf while the baseline never does is strictly worse.
  bool non_profitable() const {
    if (honest_neg_inf_runs != 0) return false;
    return neg_inf_runs > 0 || mean_difference <= 2.0 * std_err;
  }
};

PairedComparison paired_deviation_test(const RunConfig& config, const DeviationSpec& spec,
                                       std::uint64_t trials, std::uint64_t seed_base, int jobs = 0);

nlohmann::json comparison_to_json(const PairedComparison& c);

struct CurvePoint {
  std::size_t n = 0;
  double median = 0.0;
  double p95 = 0.0;
  double mean = 0.0;
  double terminated_fraction = 0.0;
};

// One graph per n (drawn from `family` with its own seed), `trials` runs each.
std::vector<CurvePoint> termination_curve(const FamilySpec& family, const std::vector<std::size_t>& n_list,
                                          Protocol protocol, std::uint64_t trials, std::uint64_t seed_base,
                                          int jobs = 0);
std::string curve_csv_header();
void write_curve_csv_row(std::ostream& os, const CurvePoint& p);

// Per-iteration join counts for honest nodes that start an iteration
// undecided with exactly `degree` undecided neighbors.
struct JoinCounts {
  std::uint64_t attempts = 0;
  std::uint64_t joins = 0;
  void add(const JoinCounts& o) {
    attempts += o.attempts;
    joins += o.joins;
  }
};

JoinCounts join_counts(const Graph& g, const RunRecord& rec, std::size_t degree);

// Same-iteration rank ties among all nodes that computed a rank.
struct TieSurvey {
  std::uint64_t runs = 0;
  std::uint64_t iterations = 0;       // iterations in which ranks were drawn
  std::uint64_t tie_pairs = 0;
  std::uint64_t tied_iterations = 0;
  std::uint64_t tied_runs = 0;
  std::uint64_t tied_runs_terminated = 0;
  std::uint32_t rank_bits = 0;
};

TieSurvey rank_tie_survey(const RunConfig& config, std::uint64_t trials, std::uint64_t seed_base, int jobs = 0);

}  // namespace rmis
