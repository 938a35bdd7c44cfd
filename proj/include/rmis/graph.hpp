#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rmis {

using NodeId = std::uint32_t;

// Undirected simple graph over dense ids [0, n). Adjacency lists are sorted,
// symmetric and loop-free; the object is immutable once built.
class Graph {
 public:
  Graph() = default;

  // Builds from an edge list. Duplicates are merged; self-loops and
  // out-of-range endpoints throw ConfigError.
  static Graph from_edges(std::size_t n,
                          const std::vector<std::pair<NodeId, NodeId>>& edges);

  std::size_t size() const { return adjacency_.size(); }
  std::size_t edge_count() const { return edge_count_; }

  std::span<const NodeId> neighbors(NodeId i) const { return adjacency_[i]; }
  std::size_t degree(NodeId i) const { return adjacency_[i].size(); }
  bool adjacent(NodeId i, NodeId j) const;

  // Position of j inside neighbors(i), or degree(i) if j is not a neighbor.
  std::size_t neighbor_slot(NodeId i, NodeId j) const;

  // mirror_slots(i)[k]: position of i inside neighbors(neighbors(i)[k]).
  std::span<const std::uint32_t> mirror_slots(NodeId i) const { return mirror_[i]; }

  std::vector<std::pair<NodeId, NodeId>> edges() const;

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::vector<std::vector<NodeId>> adjacency_;
  std::vector<std::vector<std::uint32_t>> mirror_;
  std::size_t edge_count_ = 0;
};

enum class FamilyKind { Path, Cycle, Complete, Star, Edgeless, RandomRegular, ErdosRenyi };

struct FamilySpec {
  FamilyKind kind = FamilyKind::Path;
  std::size_t n = 1;
  std::size_t degree = 0;      // random_regular only
  double edge_prob = 0.0;      // erdos_renyi only
  double mean_degree = 0.0;    // erdos_renyi "c/n" form: p = c / n when positive
  std::uint64_t seed = 0;
};

// Parses "cycle:16", "complete:3", "random_regular:128:3",
// "erdos_renyi:256:0.03" or "erdos_renyi:256:8/n" (p = 8/256).
FamilySpec parse_family(std::string_view text, std::uint64_t seed = 0);
std::string format_family(const FamilySpec& spec);

Graph make_family(const FamilySpec& spec);

// Line-oriented "u v" pairs; '#' starts a comment; blank lines ignored.
Graph load_edge_list(std::string_view text);
Graph load_edge_list_file(const std::string& path);

std::size_t max_degree(const Graph& g);

// Throws ContractViolation describing the first broken invariant.
void validate(const Graph& g);

bool is_independent_set(const Graph& g, std::span<const NodeId> members);
bool is_maximal_independent_set(const Graph& g, std::span<const NodeId> members);

}  // namespace rmis
