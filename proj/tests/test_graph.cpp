#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "rmis/errors.hpp"
#include "rmis/graph.hpp"
#include "rmis/random.hpp"

using namespace rmis;

namespace {

std::vector<NodeId> greedy_mis(const Graph& g, const std::vector<NodeId>& order) {
  std::vector<char> blocked(g.size(), 0);
  std::vector<NodeId> out;
  for (NodeId i : order) {
    if (blocked[i]) continue;
    out.push_back(i);
    blocked[i] = 1;
    for (NodeId j : g.neighbors(i)) blocked[j] = 1;
  }
  std::sort(out.begin(), out.end());
  return out;
}

void expect_well_formed(const Graph& g) {
  EXPECT_NO_THROW(validate(g));
  std::size_t degree_sum = 0;
  for (NodeId i = 0; i < g.size(); ++i) {
    auto nb = g.neighbors(i);
    auto mirror = g.mirror_slots(i);
    ASSERT_EQ(nb.size(), mirror.size());
    degree_sum += nb.size();
    for (std::size_t k = 0; k < nb.size(); ++k) {
      EXPECT_NE(nb[k], i);
      EXPECT_TRUE(g.adjacent(nb[k], i));
      EXPECT_EQ(g.neighbors(nb[k])[mirror[k]], i);
      EXPECT_EQ(g.neighbor_slot(i, nb[k]), k);
    }
  }
  EXPECT_EQ(degree_sum, 2 * g.edge_count());
}

}  // namespace

TEST(Graph, FromEdgesMergesDuplicatesAndSorts) {
  Graph g = Graph::from_edges(4, {{2, 0}, {0, 2}, {1, 3}, {0, 1}});
  EXPECT_EQ(g.size(), 4u);
  EXPECT_EQ(g.edge_count(), 3u);
  EXPECT_EQ(std::vector<NodeId>(g.neighbors(0).begin(), g.neighbors(0).end()),
            (std::vector<NodeId>{1, 2}));
  EXPECT_TRUE(g.adjacent(3, 1));
  EXPECT_FALSE(g.adjacent(2, 3));
  EXPECT_EQ(g.neighbor_slot(2, 3), g.degree(2));
  expect_well_formed(g);
}

TEST(Graph, FromEdgesRejectsLoopsAndRange) {
  EXPECT_THROW(Graph::from_edges(3, {{1, 1}}), ConfigError);
  EXPECT_THROW(Graph::from_edges(3, {{0, 3}}), ConfigError);
}

TEST(Graph, Families) {
  Graph path = make_family(parse_family("path:5"));
  EXPECT_EQ(path.edge_count(), 4u);
  EXPECT_EQ(path.degree(0), 1u);
  EXPECT_EQ(path.degree(2), 2u);

  Graph cycle = make_family(parse_family("cycle:6"));
  EXPECT_EQ(cycle.edge_count(), 6u);
  for (NodeId i = 0; i < 6; ++i) EXPECT_EQ(cycle.degree(i), 2u);
  EXPECT_TRUE(cycle.adjacent(0, 5));

  Graph k5 = make_family(parse_family("complete:5"));
  EXPECT_EQ(k5.edge_count(), 10u);
  EXPECT_EQ(max_degree(k5), 4u);

  Graph star = make_family(parse_family("star:6"));
  EXPECT_EQ(star.degree(0), 5u);
  EXPECT_EQ(star.degree(3), 1u);

  Graph empty = make_family(parse_family("edgeless:4"));
  EXPECT_EQ(empty.edge_count(), 0u);

  Graph single = make_family(parse_family("complete:1"));
  EXPECT_EQ(single.size(), 1u);
  EXPECT_EQ(single.edge_count(), 0u);

  for (const Graph* g : {&path, &cycle, &k5, &star, &empty, &single}) expect_well_formed(*g);
}

TEST(Graph, RandomRegularIsRegularAndSeeded) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Graph g = make_family(parse_family("random_regular:128:3", seed));
    expect_well_formed(g);
    for (NodeId i = 0; i < g.size(); ++i) ASSERT_EQ(g.degree(i), 3u);
    EXPECT_EQ(g, make_family(parse_family("random_regular:128:3", seed)));
  }
  EXPECT_NE(make_family(parse_family("random_regular:64:3", 1)),
            make_family(parse_family("random_regular:64:3", 2)));
}

TEST(Graph, ErdosRenyiMeanDegreeForm) {
  FamilySpec spec = parse_family("erdos_renyi:256:8/n", 5);
  EXPECT_DOUBLE_EQ(spec.mean_degree, 8.0);
  EXPECT_EQ(format_family(spec), "erdos_renyi:256:8/n");
  Graph g = make_family(spec);
  expect_well_formed(g);
  const double mean = 2.0 * static_cast<double>(g.edge_count()) / 256.0;
  // Binomial(32640, 8/256) edges: sd of the mean degree is about 0.18.
  EXPECT_NEAR(mean, 8.0 * 255.0 / 256.0, 1.0);

  Graph dense = make_family(parse_family("erdos_renyi:20:1"));
  EXPECT_EQ(dense.edge_count(), 190u);
  Graph none = make_family(parse_family("erdos_renyi:20:0"));
  EXPECT_EQ(none.edge_count(), 0u);
}

TEST(Graph, FamilyErrors) {
  EXPECT_THROW(parse_family("hypercube:8"), ConfigError);
  EXPECT_THROW(parse_family("cycle"), ConfigError);
  EXPECT_THROW(parse_family("cycle:x"), ConfigError);
  EXPECT_THROW(parse_family("erdos_renyi:10:abc"), ConfigError);
  EXPECT_THROW(make_family(parse_family("cycle:2")), ConfigError);
  EXPECT_THROW(make_family(parse_family("random_regular:5:3")), ConfigError);
  EXPECT_THROW(make_family(parse_family("random_regular:4:4")), ConfigError);
  EXPECT_THROW(make_family(parse_family("erdos_renyi:10:1.5")), ConfigError);
}

TEST(Graph, FormatRoundTrip) {
  for (const char* text : {"path:7", "cycle:16", "complete:3", "star:4", "edgeless:2",
                           "random_regular:128:3", "erdos_renyi:256:8/n"}) {
    EXPECT_EQ(format_family(parse_family(text)), text);
  }
}

TEST(Graph, EdgeListParsing) {
  Graph g = load_edge_list("# triangle plus tail\n0 1\n1 2 # inline\n\n2 0\n2 3\n");
  EXPECT_EQ(g.size(), 4u);
  EXPECT_EQ(g.edge_count(), 4u);
  expect_well_formed(g);
  EXPECT_THROW(load_edge_list("0 1 2\n"), FormatError);
  EXPECT_THROW(load_edge_list("0 x\n"), FormatError);
  EXPECT_THROW(load_edge_list("3 3\n"), FormatError);
  EXPECT_THROW(load_edge_list("-1 2\n"), FormatError);
  EXPECT_THROW(load_edge_list_file("/nonexistent/edges.txt"), ConfigError);
}

TEST(Graph, MisPredicates) {
  Graph p4 = make_family(parse_family("path:4"));
  std::vector<NodeId> a{0, 2};
  std::vector<NodeId> b{0, 3};
  std::vector<NodeId> c{0, 1};
  std::vector<NodeId> d{1};
  EXPECT_TRUE(is_maximal_independent_set(p4, a));
  EXPECT_TRUE(is_maximal_independent_set(p4, b));
  EXPECT_FALSE(is_independent_set(p4, c));
  EXPECT_TRUE(is_independent_set(p4, d));
  EXPECT_FALSE(is_maximal_independent_set(p4, d));
  Graph iso = make_family(parse_family("edgeless:3"));
  std::vector<NodeId> all{0, 1, 2};
  EXPECT_TRUE(is_maximal_independent_set(iso, all));
}

// Property: over random graphs and random subsets, maximality implies
// independence, and greedy sets are always maximal.
TEST(GraphProperty, MaximalImpliesIndependent) {
  SplitMixStream rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.below(12);
    const double p = rng.uniform();
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId i = 0; i < n; ++i)
      for (NodeId j = i + 1; j < n; ++j)
        if (rng.uniform() < p) edges.emplace_back(i, j);
    Graph g = Graph::from_edges(n, edges);
    expect_well_formed(g);

    std::vector<NodeId> order(n);
    for (NodeId i = 0; i < n; ++i) order[i] = i;
    for (std::size_t k = n; k > 1; --k) std::swap(order[k - 1], order[rng.below(k)]);
    auto mis = greedy_mis(g, order);
    EXPECT_TRUE(is_maximal_independent_set(g, mis));

    std::vector<NodeId> subset;
    for (NodeId i = 0; i < n; ++i)
      if (rng.below(2)) subset.push_back(i);
    if (is_maximal_independent_set(g, subset)) {
      EXPECT_TRUE(is_independent_set(g, subset));
    }
  }
}
