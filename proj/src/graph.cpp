#include "rmis/graph.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "rmis/errors.hpp"
#include "rmis/random.hpp"

namespace rmis {

Graph Graph::from_edges(std::size_t n, const std::vector<std::pair<NodeId, NodeId>>& edges) {
  Graph g;
  g.adjacency_.assign(n, {});
  for (auto [u, v] : edges) {
    if (u >= n || v >= n) {
      throw ConfigError("edge (" + std::to_string(u) + "," + std::to_string(v) +
                        ") out of range for n=" + std::to_string(n));
    }
    if (u == v) throw ConfigError("self-loop at node " + std::to_string(u));
    g.adjacency_[u].push_back(v);
    g.adjacency_[v].push_back(u);
  }
  std::size_t half_edges = 0;
  for (auto& adj : g.adjacency_) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
    half_edges += adj.size();
  }
  g.edge_count_ = half_edges / 2;
  g.mirror_.resize(n);
  for (NodeId i = 0; i < n; ++i) {
    g.mirror_[i].reserve(g.adjacency_[i].size());
    for (NodeId j : g.adjacency_[i]) g.mirror_[i].push_back(static_cast<std::uint32_t>(g.neighbor_slot(j, i)));
  }
  return g;
}

bool Graph::adjacent(NodeId i, NodeId j) const {
  const auto& adj = adjacency_[i];
  return std::binary_search(adj.begin(), adj.end(), j);
}

std::size_t Graph::neighbor_slot(NodeId i, NodeId j) const {
  const auto& adj = adjacency_[i];
  auto it = std::lower_bound(adj.begin(), adj.end(), j);
  if (it == adj.end() || *it != j) return adj.size();
  return static_cast<std::size_t>(it - adj.begin());
}

std::vector<std::pair<NodeId, NodeId>> Graph::edges() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  out.reserve(edge_count_);
  for (NodeId i = 0; i < adjacency_.size(); ++i) {
    for (NodeId j : adjacency_[i]) {
      if (i < j) out.emplace_back(i, j);
    }
  }
  return out;
}

namespace {

std::size_t parse_count(std::string_view token, std::string_view what) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw ConfigError("bad " + std::string(what) + " '" + std::string(token) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

Graph random_regular(std::size_t n, std::size_t d, std::uint64_t seed) {
  SplitMixStream rng(mix64(seed ^ 0x5eed5eedULL));
  constexpr int kRestarts = 1000;
  for (int attempt = 0; attempt < kRestarts; ++attempt) {
    std::vector<NodeId> points;
    points.reserve(n * d);
    for (NodeId v = 0; v < n; ++v) points.insert(points.end(), d, v);
    std::unordered_set<std::uint64_t> seen;
    std::vector<std::pair<NodeId, NodeId>> edges;
    bool stuck = false;
    while (!points.empty() && !stuck) {
      const std::size_t limit = 50 * points.size();
      std::size_t tries = 0;
      while (true) {
        std::size_t a = rng.below(points.size());
        std::size_t b = rng.below(points.size());
        NodeId u = points[a];
        NodeId v = points[b];
        std::uint64_t key = (std::uint64_t{std::min(u, v)} << 32) | std::max(u, v);
        if (a != b && u != v && !seen.contains(key)) {
          seen.insert(key);
          edges.emplace_back(u, v);
          if (a < b) std::swap(a, b);
          points[a] = points.back();
          points.pop_back();
          points[b] = points.back();
          points.pop_back();
          break;
        }
        if (++tries > limit) {
          stuck = true;
          break;
        }
      }
    }
    if (!stuck) return Graph::from_edges(n, edges);
  }
  throw ConfigError("random_regular: failed to sample a simple graph");
}

}  // namespace

FamilySpec parse_family(std::string_view text, std::uint64_t seed) {
  auto parts = split(text, ':');
  FamilySpec spec;
  spec.seed = seed;
  const std::string_view kind = parts[0];
  auto need = [&](std::size_t count) {
    if (parts.size() != count) {
      throw ConfigError("graph family '" + std::string(text) + "' expects " +
                        std::to_string(count - 1) + " parameter(s)");
    }
  };
  if (kind == "path") {
    spec.kind = FamilyKind::Path;
  } else if (kind == "cycle") {
    spec.kind = FamilyKind::Cycle;
  } else if (kind == "complete") {
    spec.kind = FamilyKind::Complete;
  } else if (kind == "star") {
    spec.kind = FamilyKind::Star;
  } else if (kind == "edgeless") {
    spec.kind = FamilyKind::Edgeless;
  } else if (kind == "random_regular") {
    spec.kind = FamilyKind::RandomRegular;
    need(3);
    spec.degree = parse_count(parts[2], "degree");
  } else if (kind == "erdos_renyi") {
    spec.kind = FamilyKind::ErdosRenyi;
    need(3);
  } else {
    throw ConfigError("unknown graph family '" + std::string(kind) + "'");
  }
  if (spec.kind != FamilyKind::RandomRegular && spec.kind != FamilyKind::ErdosRenyi) need(2);
  spec.n = parse_count(parts[1], "node count");
  if (spec.kind == FamilyKind::ErdosRenyi) {
    std::string_view p = parts[2];
    if (p.size() > 2 && p.substr(p.size() - 2) == "/n") {
      try {
        spec.mean_degree = std::stod(std::string(p.substr(0, p.size() - 2)));
      } catch (const std::exception&) {
        throw ConfigError("bad edge probability '" + std::string(p) + "'");
      }
      if (!(spec.mean_degree > 0.0)) throw ConfigError("bad edge probability '" + std::string(p) + "'");
      spec.edge_prob = spec.n > 0 ? spec.mean_degree / static_cast<double>(spec.n) : 0.0;
    } else {
      try {
        spec.edge_prob = std::stod(std::string(p));
      } catch (const std::exception&) {
        throw ConfigError("bad edge probability '" + std::string(p) + "'");
      }
    }
  }
  return spec;
}

std::string format_family(const FamilySpec& spec) {
  const std::string n = std::to_string(spec.n);
  switch (spec.kind) {
    case FamilyKind::Path: return "path:" + n;
    case FamilyKind::Cycle: return "cycle:" + n;
    case FamilyKind::Complete: return "complete:" + n;
    case FamilyKind::Star: return "star:" + n;
    case FamilyKind::Edgeless: return "edgeless:" + n;
    case FamilyKind::RandomRegular: return "random_regular:" + n + ":" + std::to_string(spec.degree);
    case FamilyKind::ErdosRenyi: {
      std::ostringstream os;
      os.precision(17);
      os << "erdos_renyi:" << n << ":";
      if (spec.mean_degree > 0.0) {
        os << spec.mean_degree << "/n";
      } else {
        os << spec.edge_prob;
      }
      return os.str();
    }
  }
  return {};
}

Graph make_family(const FamilySpec& spec) {
  const std::size_t n = spec.n;
  if (n < 1) throw ConfigError("graph family needs n >= 1");
  std::vector<std::pair<NodeId, NodeId>> edges;
  switch (spec.kind) {
    case FamilyKind::Path:
      for (NodeId i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
      break;
    case FamilyKind::Cycle:
      if (n < 3) throw ConfigError("cycle needs n >= 3");
      for (NodeId i = 0; i < n; ++i) edges.emplace_back(i, static_cast<NodeId>((i + 1) % n));
      break;
    case FamilyKind::Complete:
      for (NodeId i = 0; i < n; ++i)
        for (NodeId j = i + 1; j < n; ++j) edges.emplace_back(i, j);
      break;
    case FamilyKind::Star:
      for (NodeId i = 1; i < n; ++i) edges.emplace_back(0, i);
      break;
    case FamilyKind::Edgeless:
      break;
    case FamilyKind::RandomRegular:
      if (spec.degree >= n) throw ConfigError("random_regular needs d < n");
      if ((n * spec.degree) % 2 != 0) throw ConfigError("random_regular needs n*d even");
      return random_regular(n, spec.degree, spec.seed);
    case FamilyKind::ErdosRenyi: {
      const double p = spec.mean_degree > 0.0 ? spec.mean_degree / static_cast<double>(n) : spec.edge_prob;
      if (!(p >= 0.0 && p <= 1.0)) {
        throw ConfigError("erdos_renyi needs 0 <= p <= 1");
      }
      SplitMixStream rng(mix64(spec.seed ^ 0xe7d05ULL));
      for (NodeId i = 0; i < n; ++i)
        for (NodeId j = i + 1; j < n; ++j)
          if (rng.uniform() < p) edges.emplace_back(i, j);
      break;
    }
  }
  return Graph::from_edges(n, edges);
}

Graph load_edge_list(std::string_view text) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::size_t n = 0;
  std::size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    std::vector<std::string_view> tokens;
    std::size_t pos = 0;
    while (pos < line.size()) {
      while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
      std::size_t end = pos;
      while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
      if (end > pos) tokens.push_back(line.substr(pos, end - pos));
      pos = end;
    }
    if (tokens.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    if (tokens.size() != 2) throw FormatError(where + ": expected 'u v'");
    NodeId ends[2];
    for (int k = 0; k < 2; ++k) {
      auto tok = tokens[k];
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), ends[k]);
      if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
        throw FormatError(where + ": non-integer token '" + std::string(tok) + "'");
      }
    }
    if (ends[0] == ends[1]) throw FormatError(where + ": self-loop");
    edges.emplace_back(ends[0], ends[1]);
    n = std::max<std::size_t>(n, std::max(ends[0], ends[1]) + std::size_t{1});
  }
  return Graph::from_edges(n, edges);
}

Graph load_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open edge list '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_edge_list(buffer.str());
}

std::size_t max_degree(const Graph& g) {
  std::size_t delta = 0;
  for (NodeId i = 0; i < g.size(); ++i) delta = std::max(delta, g.degree(i));
  return delta;
}

void validate(const Graph& g) {
  for (NodeId i = 0; i < g.size(); ++i) {
    auto adj = g.neighbors(i);
    for (std::size_t k = 0; k < adj.size(); ++k) {
      NodeId j = adj[k];
      if (j >= g.size()) throw ContractViolation("neighbor out of range at node " + std::to_string(i));
      if (j == i) throw ContractViolation("self-loop at node " + std::to_string(i));
      if (k > 0 && adj[k - 1] >= j) throw ContractViolation("adjacency not strictly sorted at node " + std::to_string(i));
      if (!g.adjacent(j, i)) {
        throw ContractViolation("asymmetric edge " + std::to_string(i) + "->" + std::to_string(j));
      }
    }
  }
}

bool is_independent_set(const Graph& g, std::span<const NodeId> members) {
  std::vector<char> in(g.size(), 0);
  for (NodeId v : members) in[v] = 1;
  for (NodeId v : members) {
    for (NodeId u : g.neighbors(v)) {
      if (in[u]) return false;
    }
  }
  return true;
}

bool is_maximal_independent_set(const Graph& g, std::span<const NodeId> members) {
  if (!is_independent_set(g, members)) return false;
  std::vector<char> in(g.size(), 0);
  for (NodeId v : members) in[v] = 1;
  for (NodeId v = 0; v < g.size(); ++v) {
    if (in[v]) continue;
    auto adj = g.neighbors(v);
    if (std::none_of(adj.begin(), adj.end(), [&](NodeId u) { return in[u] != 0; })) return false;
  }
  return true;
}

}  // namespace rmis
