#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "regime_graph/correlation.hpp"

namespace regime_graph {

// Metric distance between two series with correlation c: sqrt(2 (1 - c)).
double distance(double correlation);

enum class GraphKind { MST, PMFG };
std::string_view graph_kind_name(GraphKind k);
GraphKind parse_graph_kind(std::string_view text);

struct Edge {
  std::size_t i = 0;  // i < j, indices into CorrelationGraph::nodes
  std::size_t j = 0;
  double correlation = 0.0;
  double distance = 0.0;

  bool operator==(const Edge&) const = default;
};

struct CorrelationGraph {
  GraphKind kind = GraphKind::MST;
  std::vector<std::string> nodes;
  std::vector<Edge> edges;  // in insertion order
  Interval source_interval;

  bool operator==(const CorrelationGraph&) const = default;
};

// Kruskal over ascending distance with ties broken by (i, j).
CorrelationGraph mst(const CorrelationMatrix& c);

// Greedy insertion in the same order as mst, keeping an edge only if the
// graph stays planar, until 3(n - 2) edges are kept.
CorrelationGraph pmfg(const CorrelationMatrix& c);

// Planarity of a simple undirected graph on n vertices.
bool is_planar(std::size_t n, std::span<const std::pair<std::size_t, std::size_t>> edges);

enum class TopologyClass { StarLike, ChainLike, Intermediate };
std::string_view topology_class_name(TopologyClass c);

struct TopologyRule {
  // star_like: max_degree >= max(star_min_degree, ceil((n-1)/2)) and
  //            diameter <= star_max_diameter (tested first)
  // chain_like: diameter >= n - chain_diameter_slack and
  //             max_degree <= chain_max_degree
  std::size_t star_min_degree = 3;
  std::size_t star_max_diameter = 4;
  std::size_t chain_diameter_slack = 3;
  std::size_t chain_max_degree = 3;

  bool operator==(const TopologyRule&) const = default;
};

struct TopologyMetrics {
  std::size_t max_degree = 0;
  std::size_t diameter = 0;
  std::size_t leaf_count = 0;
  double mean_occupation_layer = 0.0;
  std::string hub;
  TopologyClass classification = TopologyClass::Intermediate;
  std::vector<std::size_t> degree;        // per node
  std::vector<std::size_t> hub_distance;  // per node

  bool operator==(const TopologyMetrics&) const = default;
};

TopologyMetrics topology(const CorrelationGraph& g, const TopologyRule& rule = {});

using NamedEdge = std::pair<std::string, std::string>;  // first < second

struct TreeDiff {
  std::vector<NamedEdge> broken;
  std::vector<NamedEdge> formed;
  std::vector<NamedEdge> preserved_backbone;
  std::size_t primitive_count = 0;

  bool operator==(const TreeDiff&) const = default;
};

TreeDiff diff(const CorrelationGraph& a, const CorrelationGraph& b);

NamedEdge named_edge(const CorrelationGraph& g, const Edge& e);
bool has_edge(const CorrelationGraph& g, const std::string& a, const std::string& b);

struct DotOptions {
  std::string title;
  // Per-node rank shown next to the sector, e.g. entry ranks of a
  // corresponding segment.
  std::map<std::string, int> node_ranks;
  // PMFG edges also in this tree are drawn solid, the rest dashed.
  std::optional<CorrelationGraph> highlight_tree;
};

// Undirected DOT graph; pen width grows with correlation.
void write_dot(std::ostream& out, const CorrelationGraph& g, const DotOptions& options = {});

}  // namespace regime_graph
