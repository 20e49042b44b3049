#include "regime_graph/market_graphs.hpp"

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/boyer_myrvold_planar_test.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>
#include <set>

#include "regime_graph/error.hpp"
#include "text_util.hpp"

namespace regime_graph {

double distance(double correlation) {
  constexpr double kSlack = 1e-12;
  if (!(correlation >= -1.0 - kSlack && correlation <= 1.0 + kSlack)) {
    throw DomainError(ErrorCode::OutOfRange, "correlation outside [-1, 1]");
  }
  double c = std::clamp(correlation, -1.0, 1.0);
  return std::sqrt(2.0 * (1.0 - c));
}

std::string_view graph_kind_name(GraphKind k) { return k == GraphKind::MST ? "MST" : "PMFG"; }

GraphKind parse_graph_kind(std::string_view text) {
  auto t = detail::lower(text);
  if (t == "mst") return GraphKind::MST;
  if (t == "pmfg") return GraphKind::PMFG;
  throw DomainError(ErrorCode::ParseError, "unknown graph kind '" + std::string(text) + "'");
}

namespace {

class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n) : parent_(n), rank_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<int> rank_;
};

std::vector<Edge> sorted_edges(const CorrelationMatrix& c) {
  std::vector<Edge> edges;
  const std::size_t n = c.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      edges.push_back({i, j, c(i, j), distance(c(i, j))});
    }
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.distance, a.i, a.j) < std::tie(b.distance, b.i, b.j);
  });
  return edges;
}

}  // namespace

CorrelationGraph mst(const CorrelationMatrix& c) {
  validate_matrix(c);
  if (c.size() < 2) throw DomainError(ErrorCode::InvalidArgument, "MST needs at least 2 nodes");
  CorrelationGraph g;
  g.kind = GraphKind::MST;
  g.nodes = c.sectors;
  g.source_interval = c.interval;
  DisjointSet sets(c.size());
  for (const auto& e : sorted_edges(c)) {
    if (sets.unite(e.i, e.j)) {
      g.edges.push_back(e);
      if (g.edges.size() + 1 == c.size()) break;
    }
  }
  return g;
}

bool is_planar(std::size_t n, std::span<const std::pair<std::size_t, std::size_t>> edges) {
  using Graph = boost::adjacency_list<boost::vecS, boost::vecS, boost::undirectedS>;
  Graph g(n);
  for (auto [a, b] : edges) boost::add_edge(a, b, g);
  return boost::boyer_myrvold_planarity_test(g);
}

CorrelationGraph pmfg(const CorrelationMatrix& c) {
  validate_matrix(c);
  const std::size_t n = c.size();
  if (n < 3) throw DomainError(ErrorCode::InvalidArgument, "PMFG needs at least 3 nodes");
  CorrelationGraph g;
  g.kind = GraphKind::PMFG;
  g.nodes = c.sectors;
  g.source_interval = c.interval;
  const std::size_t target = 3 * (n - 2);
  std::vector<std::pair<std::size_t, std::size_t>> kept;
  for (const auto& e : sorted_edges(c)) {
    kept.emplace_back(e.i, e.j);
    if (is_planar(n, kept)) {
      g.edges.push_back(e);
      if (g.edges.size() == target) break;
    } else {
      kept.pop_back();
    }
  }
  return g;
}

std::string_view topology_class_name(TopologyClass c) {
  switch (c) {
    case TopologyClass::StarLike: return "star_like";
    case TopologyClass::ChainLike: return "chain_like";
    case TopologyClass::Intermediate: return "intermediate";
  }
  return "intermediate";
}

namespace {

std::vector<std::size_t> hop_distances(const std::vector<std::vector<std::size_t>>& adj,
                                       std::size_t from) {
  constexpr auto kUnreached = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> dist(adj.size(), kUnreached);
  std::queue<std::size_t> q;
  dist[from] = 0;
  q.push(from);
  while (!q.empty()) {
    auto v = q.front();
    q.pop();
    for (auto w : adj[v]) {
      if (dist[w] == kUnreached) {
        dist[w] = dist[v] + 1;
        q.push(w);
      }
    }
  }
  return dist;
}

}  // namespace

TopologyMetrics topology(const CorrelationGraph& g, const TopologyRule& rule) {
  const std::size_t n = g.nodes.size();
  if (n == 0 || g.edges.size() + 1 != n) {
    throw DomainError(ErrorCode::NotATree, "graph with " + std::to_string(n) + " nodes has " +
                                               std::to_string(g.edges.size()) + " edges");
  }
  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& e : g.edges) {
    if (e.i >= n || e.j >= n || e.i == e.j) {
      throw DomainError(ErrorCode::NotATree, "edge references an invalid node");
    }
    adj[e.i].push_back(e.j);
    adj[e.j].push_back(e.i);
  }
  auto from0 = hop_distances(adj, 0);
  if (std::any_of(from0.begin(), from0.end(),
                  [](std::size_t d) { return d == std::numeric_limits<std::size_t>::max(); })) {
    throw DomainError(ErrorCode::NotATree, "graph is not connected");
  }

  TopologyMetrics m;
  m.degree.resize(n);
  std::size_t hub = 0;
  for (std::size_t v = 0; v < n; ++v) {
    m.degree[v] = adj[v].size();
    if (m.degree[v] == 1) ++m.leaf_count;
    if (m.degree[v] > m.degree[hub] ||
        (m.degree[v] == m.degree[hub] && g.nodes[v] < g.nodes[hub])) {
      hub = v;
    }
  }
  m.max_degree = m.degree[hub];
  m.hub = g.nodes[hub];
  for (std::size_t v = 0; v < n; ++v) {
    auto d = hop_distances(adj, v);
    m.diameter = std::max(m.diameter, *std::max_element(d.begin(), d.end()));
  }
  m.hub_distance = hop_distances(adj, hub);
  m.mean_occupation_layer =
      static_cast<double>(std::accumulate(m.hub_distance.begin(), m.hub_distance.end(),
                                          std::size_t{0})) /
      static_cast<double>(n);

  const std::size_t star_degree = std::max(rule.star_min_degree, n / 2);  // ceil((n-1)/2)
  if (m.max_degree >= star_degree && m.diameter <= rule.star_max_diameter) {
    m.classification = TopologyClass::StarLike;
  } else if (m.diameter + rule.chain_diameter_slack >= n &&
             m.max_degree <= rule.chain_max_degree) {
    m.classification = TopologyClass::ChainLike;
  } else {
    m.classification = TopologyClass::Intermediate;
  }
  return m;
}

NamedEdge named_edge(const CorrelationGraph& g, const Edge& e) {
  const auto& a = g.nodes.at(e.i);
  const auto& b = g.nodes.at(e.j);
  return a < b ? NamedEdge{a, b} : NamedEdge{b, a};
}

bool has_edge(const CorrelationGraph& g, const std::string& a, const std::string& b) {
  NamedEdge want = a < b ? NamedEdge{a, b} : NamedEdge{b, a};
  return std::any_of(g.edges.begin(), g.edges.end(),
                     [&](const Edge& e) { return named_edge(g, e) == want; });
}

TreeDiff diff(const CorrelationGraph& a, const CorrelationGraph& b) {
  std::set<std::string> na(a.nodes.begin(), a.nodes.end());
  std::set<std::string> nb(b.nodes.begin(), b.nodes.end());
  if (na != nb || na.size() != a.nodes.size() || nb.size() != b.nodes.size()) {
    throw DomainError(ErrorCode::NodeSetMismatch, "graphs are over different sector sets");
  }
  std::set<NamedEdge> ea, eb;
  for (const auto& e : a.edges) ea.insert(named_edge(a, e));
  for (const auto& e : b.edges) eb.insert(named_edge(b, e));
  TreeDiff d;
  std::set_difference(ea.begin(), ea.end(), eb.begin(), eb.end(), std::back_inserter(d.broken));
  std::set_difference(eb.begin(), eb.end(), ea.begin(), ea.end(), std::back_inserter(d.formed));
  std::set_intersection(ea.begin(), ea.end(), eb.begin(), eb.end(),
                        std::back_inserter(d.preserved_backbone));
  d.primitive_count = d.broken.size();
  return d;
}

namespace {

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  return out + '"';
}

std::string fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

void write_dot(std::ostream& out, const CorrelationGraph& g, const DotOptions& options) {
  out << "graph " << quoted(options.title.empty() ? std::string(graph_kind_name(g.kind))
                                                  : options.title)
      << " {\n";
  out << "  node [shape=ellipse];\n";
  for (const auto& node : g.nodes) {
    auto it = options.node_ranks.find(node);
    std::string label = it == options.node_ranks.end()
                            ? node
                            : node + " (" + std::to_string(it->second) + ")";
    out << "  " << quoted(node) << " [label=" << quoted(label) << "];\n";
  }
  for (const auto& e : g.edges) {
    double width = 0.5 + 5.0 * std::max(0.0, e.correlation);
    out << "  " << quoted(g.nodes[e.i]) << " -- " << quoted(g.nodes[e.j])
        << " [penwidth=" << fixed(width, 2) << ", label=" << quoted(fixed(e.correlation, 3));
    if (options.highlight_tree && !has_edge(*options.highlight_tree, g.nodes[e.i], g.nodes[e.j])) {
      out << ", style=dashed";
    }
    out << "];\n";
  }
  out << "}\n";
}

}  // namespace regime_graph
