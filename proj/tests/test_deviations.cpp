#include <gtest/gtest.h>

#include <algorithm>

#include "rmis/deviations.hpp"
#include "rmis/errors.hpp"
#include "test_support.hpp"

using namespace rmis;
using rmis::testing::ObservationBuilder;

namespace {

const DeviationKind kAll[] = {DeviationKind::BiasedMoves, DeviationKind::Silent,     DeviationKind::GarbageSender,
                              DeviationKind::EarlyOne,    DeviationKind::EarlyZero,  DeviationKind::EarlyBot,
                              DeviationKind::BiasedRand,  DeviationKind::StaleForward, DeviationKind::WrongForward};

Action sample_action(std::uint64_t round) {
  Action a;
  a.outbound.push_back(Message{0, NodeId{1}, round, RpsMovePayload{Move::Paper}});
  return a;
}

}  // namespace

TEST(Deviations, NamesRoundTrip) {
  for (DeviationKind k : kAll) EXPECT_EQ(parse_deviation_kind(to_string(k)), k);
  EXPECT_EQ(parse_deviation_kind("garbage_sender"), DeviationKind::GarbageSender);
  EXPECT_THROW(parse_deviation_kind("byzantine"), ConfigError);
}

TEST(Deviations, DetectabilityClasses) {
  for (DeviationKind k : {DeviationKind::Silent, DeviationKind::GarbageSender, DeviationKind::EarlyOne,
                          DeviationKind::StaleForward, DeviationKind::WrongForward}) {
    EXPECT_TRUE(detectable(k)) << to_string(k);
  }
  for (DeviationKind k : {DeviationKind::BiasedMoves, DeviationKind::EarlyZero, DeviationKind::EarlyBot,
                          DeviationKind::BiasedRand}) {
    EXPECT_FALSE(detectable(k)) << to_string(k);
  }
}

TEST(Deviations, CatalogPerProtocol) {
  auto rps = catalog(Protocol::Rps);
  auto rank = catalog(Protocol::Rank);
  EXPECT_EQ(rps.size(), 6u);
  EXPECT_EQ(rank.size(), 8u);
  auto has = [](const std::vector<DeviationKind>& v, DeviationKind k) {
    return std::find(v.begin(), v.end(), k) != v.end();
  };
  EXPECT_TRUE(has(rps, DeviationKind::BiasedMoves));
  EXPECT_FALSE(has(rps, DeviationKind::BiasedRand));
  EXPECT_FALSE(has(rank, DeviationKind::BiasedMoves));
  EXPECT_TRUE(has(rank, DeviationKind::StaleForward));
  for (DeviationKind k : kAll) EXPECT_TRUE(has(rps, k) || has(rank, k));
}

TEST(Deviations, ParseAndFormat) {
  auto spec = parse_deviation("node=2,strategy=biased_moves,params=0.5:0.25:0.25,activation=3");
  EXPECT_EQ(spec.node, 2u);
  EXPECT_EQ(spec.kind, DeviationKind::BiasedMoves);
  EXPECT_EQ(spec.params, (std::vector<double>{0.5, 0.25, 0.25}));
  EXPECT_EQ(spec.activation_round, 3u);
  EXPECT_EQ(parse_deviation(format_deviation(spec)), spec);

  auto minimal = parse_deviation("strategy=silent,node=0");
  EXPECT_EQ(format_deviation(minimal), "node=0,strategy=silent");
  EXPECT_TRUE(resolved_params(minimal).empty());
  EXPECT_EQ(resolved_params(parse_deviation("node=0,strategy=biased_moves")),
            (std::vector<double>{1, 0, 0}));
  EXPECT_EQ(resolved_params(parse_deviation("node=0,strategy=biased_rand")), (std::vector<double>{0, 1}));
}

TEST(Deviations, ParseErrors) {
  EXPECT_THROW(parse_deviation("strategy=silent"), ConfigError);
  EXPECT_THROW(parse_deviation("node=0"), ConfigError);
  EXPECT_THROW(parse_deviation("node=-1,strategy=silent"), ConfigError);
  EXPECT_THROW(parse_deviation("node=0,strategy=silent,color=red"), ConfigError);
  EXPECT_THROW(parse_deviation("node=0,strategy=silent,params=1"), ConfigError);
  EXPECT_THROW(parse_deviation("node=0,strategy=biased_moves,params=1:2"), ConfigError);
  EXPECT_THROW(parse_deviation("node=0,strategy=biased_moves,params=0:0:0"), ConfigError);
  EXPECT_THROW(parse_deviation("node=0,strategy=biased_rand,params=0.5:1.5"), ConfigError);
  EXPECT_THROW(parse_deviation("node=0,strategy=biased_rand,params=x:1"), ConfigError);
  EXPECT_THROW(parse_deviation("node0"), ConfigError);
}

TEST(Deviations, CheckAgainstProtocolAndGraph) {
  EXPECT_THROW(check_deviation(parse_deviation("node=0,strategy=biased_rand"), Protocol::Rps, 3), ConfigError);
  EXPECT_THROW(check_deviation(parse_deviation("node=0,strategy=biased_moves"), Protocol::Rank, 3), ConfigError);
  EXPECT_THROW(check_deviation(parse_deviation("node=3,strategy=silent"), Protocol::Rps, 3), ConfigError);
  EXPECT_NO_THROW(check_deviation(parse_deviation("node=2,strategy=silent"), Protocol::Rank, 3));
}

TEST(DeviationBehavior, BiasedMovesSourceFollowsWeights) {
  DeviationBehavior b(parse_deviation("node=1,strategy=biased_moves,params=0:0:1,activation=6"), 9, 8);
  auto rng = b.make_random();
  PrfRandom honest(9, 1);
  for (std::uint64_t r = 0; r < 6; ++r) EXPECT_EQ(rng->move(r, 0), honest.move(r, 0));
  for (std::uint64_t r = 6; r < 60; ++r) EXPECT_EQ(rng->move(r, 0), Move::Scissors);
  EXPECT_EQ(rng->opponent_index(7, 5), honest.opponent_index(7, 5));
}

TEST(DeviationBehavior, BiasedRandSourceBits) {
  DeviationBehavior b(parse_deviation("node=0,strategy=biased_rand"), 4, 8);
  auto rng = b.make_random();
  for (std::uint64_t r = 1; r < 50; r += 5) {
    EXPECT_EQ(rng->self_bits(r, 12), (RankBits{0, 12}));
    EXPECT_EQ(rng->pair_bits(r, 3, 12), RankBits::all_ones(12));
  }
  DeviationBehavior half(parse_deviation("node=0,strategy=biased_rand,params=0.5:0.5"), 4, 8);
  auto r2 = half.make_random();
  int ones = 0;
  for (std::uint64_t r = 0; r < 400; ++r) ones += __builtin_popcountll(r2->self_bits(r, 16).value);
  EXPECT_NEAR(ones / (400.0 * 16.0), 0.5, 0.03);
}

TEST(DeviationBehavior, SilentAfterActivation) {
  DeviationBehavior b(parse_deviation("node=0,strategy=silent,activation=3"), 1, 8);
  ObservationBuilder ob({1}, 2);
  Action actual;
  auto obs0 = ob.build(0);
  b.apply(obs0, sample_action(0), actual);
  EXPECT_EQ(actual, sample_action(0));
  EXPECT_FALSE(b.fired());
  auto obs3 = ob.build(3);
  b.apply(obs3, sample_action(3), actual);
  EXPECT_TRUE(actual.outbound.empty());
  EXPECT_TRUE(b.fired());
  EXPECT_EQ(b.fired_round(), 3u);
}

TEST(DeviationBehavior, NoFireWithoutUndecidedNeighbor) {
  DeviationBehavior b(parse_deviation("node=0,strategy=silent"), 1, 8);
  ObservationBuilder ob({1}, 2);
  ob.outputs[1] = OutputValue::Zero;
  Action actual;
  auto obs = ob.build(0);
  b.apply(obs, sample_action(0), actual);
  EXPECT_FALSE(b.fired());
}

TEST(DeviationBehavior, GarbageReplacesPayloads) {
  DeviationBehavior b(parse_deviation("node=0,strategy=garbage"), 1, 13);
  ObservationBuilder ob({1}, 2);
  Action actual;
  auto obs = ob.build(0);
  b.apply(obs, sample_action(0), actual);
  ASSERT_EQ(actual.outbound.size(), 1u);
  const auto* g = std::get_if<Garbage>(&actual.outbound[0].payload);
  ASSERT_NE(g, nullptr);
  EXPECT_EQ(g->bytes.size(), 13u);
  EXPECT_EQ(actual.outbound[0].to, NodeId{1});
}

TEST(DeviationBehavior, EarlyOutputs) {
  ObservationBuilder ob({1}, 2);
  auto obs = ob.build(0);
  for (auto [name, value] : {std::pair{"early_one", OutputValue::One}, std::pair{"early_zero", OutputValue::Zero},
                             std::pair{"early_bot", OutputValue::Bot}}) {
    DeviationBehavior b(parse_deviation(std::string("node=0,strategy=") + name), 1, 8);
    Action actual;
    b.apply(obs, sample_action(0), actual);
    EXPECT_EQ(actual.output, value);
    EXPECT_TRUE(actual.outbound.empty());
    EXPECT_TRUE(b.fired());
  }
}

TEST(DeviationBehavior, ForwardTampering) {
  ObservationBuilder ob({1}, 2);
  Action honest;
  honest.outbound.push_back(
      Message{0, std::nullopt, 7, ForwardedPairRand{2, 1, RankBits{6, 4}, Signature{}}});

  DeviationBehavior wrong(parse_deviation("node=0,strategy=wrong_forward"), 1, 8);
  Action actual;
  auto obs7 = ob.build(7);
  wrong.apply(obs7, honest, actual);
  EXPECT_EQ(std::get<ForwardedPairRand>(actual.outbound[0].payload).bits.value, 7u);

  // Without an older share on record the iteration stamp is rolled back.
  DeviationBehavior stale(parse_deviation("node=0,strategy=stale_forward"), 1, 8);
  stale.apply(obs7, honest, actual);
  EXPECT_EQ(std::get<ForwardedPairRand>(actual.outbound[0].payload).iteration, 1u);

  // With one on record, that older signed share is replayed.
  DeviationBehavior replay(parse_deviation("node=0,strategy=stale_forward"), 1, 8);
  ob.by_slot[0].push_back(Message{1, std::nullopt, 1, PairRand{1, 1, 0, RankBits{3, 4}, Signature{}}});
  auto obs2 = ob.build(2);
  Action none;
  replay.apply(obs2, none, actual);
  ob.clear_messages();
  replay.apply(obs7, honest, actual);
  const auto& f = std::get<ForwardedPairRand>(actual.outbound[0].payload);
  EXPECT_EQ(f.iteration, 1u);
  EXPECT_EQ(f.bits.value, 3u);
}
