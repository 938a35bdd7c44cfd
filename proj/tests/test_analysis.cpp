#include <gtest/gtest.h>

#include <sstream>

#include "rmis/analysis.hpp"
#include "rmis/errors.hpp"

using namespace rmis;

namespace {

RunConfig config_for(const char* family, Protocol p, std::uint64_t graph_seed = 3) {
  RunConfig c;
  c.graph = std::make_shared<const Graph>(make_family(parse_family(family, graph_seed)));
  c.protocol = p;
  return c;
}

RunRecord synthetic(std::size_t n, std::uint64_t iterations, bool terminated = true) {
  RunRecord r;
  r.terminated = terminated;
  r.iterations_used = iterations;
  r.rounds_used = iterations * 3;
  r.outputs.assign(n, OutputValue::Zero);
  r.outputs[0] = OutputValue::One;
  r.decided_round.assign(n, 0);
  r.utilities.assign(n, UtilityValue::finite(0.0));
  r.utilities[0] = UtilityValue::finite(1.0);
  r.cheat_flags.assign(n, 0);
  return r;
}

void expect_same(const TrialSummary& a, const TrialSummary& b) {
  EXPECT_EQ(a.trials, b.trials);
  EXPECT_EQ(a.terminated_fraction, b.terminated_fraction);
  EXPECT_EQ(a.iterations.mean, b.iterations.mean);
  EXPECT_EQ(a.iterations.median, b.iterations.median);
  EXPECT_EQ(a.iterations.p95, b.iterations.p95);
  EXPECT_EQ(a.iterations.max, b.iterations.max);
  EXPECT_EQ(a.inclusion_frequency, b.inclusion_frequency);
  EXPECT_EQ(a.mean_finite_utility, b.mean_finite_utility);
  EXPECT_EQ(a.bot_count, b.bot_count);
  EXPECT_EQ(a.neg_inf_count, b.neg_inf_count);
  EXPECT_EQ(a.cheat_count, b.cheat_count);
  EXPECT_EQ(a.mis_failures, b.mis_failures);
}

}  // namespace

TEST(Summary, QuantilesAndCounts) {
  Graph star = make_family(parse_family("star:3"));
  SummaryBuilder b(star);
  for (std::uint64_t it = 1; it <= 20; ++it) b.add(synthetic(3, it));
  b.add(synthetic(3, 99, false));
  RunRecord bad = synthetic(3, 4);
  bad.outputs[1] = OutputValue::One;  // 0 and 1 adjacent: not independent
  bad.utilities[1] = UtilityValue::negative_infinity();
  bad.cheat_flags[2] = 1;
  b.add(bad);
  TrialSummary s = b.build();
  EXPECT_EQ(s.trials, 22u);
  EXPECT_DOUBLE_EQ(s.terminated_fraction, 21.0 / 22.0);
  // Terminated iteration counts: 1..20 and 4. Sorted: 1,2,3,4,4,5,...,20.
  EXPECT_DOUBLE_EQ(s.iterations.median, 10.0);
  EXPECT_DOUBLE_EQ(s.iterations.p95, 19.0);  // nearest rank ceil(0.95 * 21) = 20
  EXPECT_EQ(s.iterations.max, 20u);
  EXPECT_NEAR(s.iterations.mean, 214.0 / 21.0, 1e-12);
  EXPECT_EQ(s.mis_failures, 1u);
  EXPECT_EQ(s.neg_inf_count, 1u);
  EXPECT_EQ(s.cheat_count, 1u);
  EXPECT_DOUBLE_EQ(s.inclusion_frequency[0], 1.0);
  EXPECT_DOUBLE_EQ(s.inclusion_frequency[1], 1.0 / 22.0);
  // The -inf utility is counted, not averaged.
  EXPECT_DOUBLE_EQ(s.mean_finite_utility[1], 0.0);
  EXPECT_DOUBLE_EQ(s.mean_finite_utility[0], 1.0);
}

TEST(Trials, ParallelEqualsSerial) {
  for (Protocol p : {Protocol::Rps, Protocol::Rank}) {
    auto c = config_for("random_regular:32:3", p);
    auto serial = run_trials_serial(c, 300, 1000);
    for (int jobs : {1, 2, 3, 8}) expect_same(serial, run_trials(c, 300, 1000, jobs));
  }
}

TEST(Trials, ForEachRunDeliversInSeedOrder) {
  auto c = config_for("cycle:10", Protocol::Rps);
  std::vector<std::uint64_t> seeds;
  std::vector<std::uint64_t> rounds_par, rounds_ser;
  for_each_run(c, 500, 42, 4, [&](const RunRecord& r) {
    seeds.push_back(r.seed);
    rounds_par.push_back(r.rounds_used);
  });
  for_each_run_serial(c, 500, 42, [&](const RunRecord& r) { rounds_ser.push_back(r.rounds_used); });
  ASSERT_EQ(seeds.size(), 500u);
  for (std::uint64_t k = 0; k < 500; ++k) EXPECT_EQ(seeds[k], 42 + k);
  EXPECT_EQ(rounds_par, rounds_ser);
}

TEST(Trials, HonestSummaryIsClean) {
  auto c = config_for("erdos_renyi:60:5/n", Protocol::Rank);
  auto s = run_trials(c, 200, 0, 2);
  EXPECT_DOUBLE_EQ(s.terminated_fraction, 1.0);
  EXPECT_EQ(s.bot_count, 0u);
  EXPECT_EQ(s.neg_inf_count, 0u);
  EXPECT_EQ(s.cheat_count, 0u);
  EXPECT_EQ(s.mis_failures, 0u);
  for (double f : s.inclusion_frequency) {
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0);
  }
  EXPECT_THROW(run_trials(c, 0, 0), ConfigError);
}

TEST(Trials, SummaryExports) {
  auto c = config_for("path:4", Protocol::Rps);
  auto s = run_trials(c, 50, 0);
  auto j = summary_to_json(s);
  EXPECT_EQ(j.at("trials").get<std::uint64_t>(), 50u);
  std::ostringstream os;
  write_summary_csv_row(os, s);
  auto header = summary_csv_header(4);
  auto commas = [](const std::string& t) { return std::count(t.begin(), t.end(), ','); };
  EXPECT_EQ(commas(header), commas(os.str()));
  EXPECT_NE(header.find("inclusion_3"), std::string::npos);
}

TEST(Paired, EarlyZeroLosesUtility) {
  auto c = config_for("complete:2", Protocol::Rps);
  auto cmp = paired_deviation_test(c, parse_deviation("node=0,strategy=early_zero"), 400, 0, 2);
  EXPECT_EQ(cmp.trials, 400u);
  EXPECT_EQ(cmp.fired_runs, 400u);
  EXPECT_EQ(cmp.detected_runs, 0u);
  EXPECT_DOUBLE_EQ(cmp.deviant_mean, 0.0);
  EXPECT_NEAR(cmp.honest_mean, 0.5, 0.1);
  EXPECT_LT(cmp.mean_difference, 0.0);
  EXPECT_TRUE(cmp.non_profitable());
  auto j = comparison_to_json(cmp);
  EXPECT_TRUE(j.at("non_profitable").get<bool>());
}

TEST(Paired, DetectableDeviationNeverPays) {
  for (const char* kind : {"silent", "garbage", "early_one"}) {
    auto c = config_for("path:3", Protocol::Rank);
    auto cmp = paired_deviation_test(c, parse_deviation(std::string("node=1,strategy=") + kind), 300, 7);
    EXPECT_EQ(cmp.fired_positive_runs, 0u) << kind;
    EXPECT_GT(cmp.detected_runs, 0u) << kind;
    EXPECT_TRUE(cmp.non_profitable()) << kind;
  }
}

TEST(Paired, SerialAndParallelAgree) {
  auto c = config_for("cycle:5", Protocol::Rps);
  auto spec = parse_deviation("node=2,strategy=biased_moves,params=0.6:0.2:0.2");
  auto a = paired_deviation_test(c, spec, 300, 5, 1);
  auto b = paired_deviation_test(c, spec, 300, 5, 4);
  EXPECT_EQ(a.mean_difference, b.mean_difference);
  EXPECT_EQ(a.std_err, b.std_err);
  EXPECT_EQ(a.fired_runs, b.fired_runs);
}

TEST(Curve, OnePointPerSize) {
  auto pts = termination_curve(parse_family("cycle:8"), {8, 16, 32}, Protocol::Rps, 100, 0, 2);
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_EQ(pts[2].n, 32u);
  for (const auto& p : pts) {
    EXPECT_DOUBLE_EQ(p.terminated_fraction, 1.0);
    EXPECT_LE(p.median, p.p95);
  }
  std::ostringstream os;
  write_curve_csv_row(os, pts[0]);
  EXPECT_EQ(os.str().substr(0, 2), "8,");
  EXPECT_EQ(curve_csv_header().substr(0, 2), "n,");
}

TEST(JoinCounts, HandBuiltRecord) {
  // Path 0-1-2 under rps: in iteration 1 node 1 joins (round 1), then the
  // leaves decide in round 2.
  Graph p3 = make_family(parse_family("path:3"));
  RunRecord r;
  r.protocol = Protocol::Rps;
  r.rounds_used = 3;
  r.outputs = {OutputValue::Zero, OutputValue::One, OutputValue::Zero};
  r.decided_round = {2, 1, 2};
  auto two = join_counts(p3, r, 2);
  EXPECT_EQ(two.attempts, 1u);
  EXPECT_EQ(two.joins, 1u);
  auto one = join_counts(p3, r, 1);
  EXPECT_EQ(one.attempts, 2u);
  EXPECT_EQ(one.joins, 0u);
}

TEST(TieSurvey, CountsAllEqualPairs) {
  auto c = config_for("complete:3", Protocol::Rank);
  c.rank_bits = 1;  // ties are common with one bit
  auto s = rank_tie_survey(c, 200, 0, 2);
  EXPECT_EQ(s.runs, 200u);
  EXPECT_EQ(s.rank_bits, 1u);
  EXPECT_GT(s.iterations, 200u);
  // Three 1-bit ranks always contain at least one equal pair.
  EXPECT_GE(s.tie_pairs, s.iterations);
  EXPECT_EQ(s.tied_iterations, s.iterations);
  auto bad = c;
  bad.protocol = Protocol::Rps;
  EXPECT_THROW(rank_tie_survey(bad, 1, 0), ConfigError);
}
