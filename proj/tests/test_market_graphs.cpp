#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "regime_graph/error.hpp"
#include "regime_graph/market_graphs.hpp"
#include "regime_graph/synthetic.hpp"
#include "support.hpp"

using namespace regime_graph;

namespace {

using EdgeList = std::vector<std::pair<std::size_t, std::size_t>>;

std::vector<std::string> names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(std::string("N") + char('0' + i / 10) + char('0' + i % 10));
  }
  return out;
}

// Symmetric matrix with distinct off-diagonal entries in (-1, 1).
CorrelationMatrix random_matrix(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-0.99, 0.99);
  CorrelationMatrix c;
  c.sectors = names(n);
  c.values.assign(n * n, 1.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) c(i, j) = c(j, i) = u(rng);
  return c;
}

CorrelationGraph tree_of(std::size_t n, const EdgeList& edges) {
  CorrelationGraph g;
  g.nodes = names(n);
  for (auto [a, b] : edges) g.edges.push_back({std::min(a, b), std::max(a, b), 0.5, distance(0.5)});
  return g;
}

EdgeList pairs(const CorrelationGraph& g) {
  EdgeList out;
  for (const auto& e : g.edges) out.emplace_back(e.i, e.j);
  return out;
}

double weight(const CorrelationGraph& g) {
  double w = 0.0;
  for (const auto& e : g.edges) w += e.distance;
  return w;
}

// Random labelled tree from a Pruefer sequence.
EdgeList random_tree(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<std::size_t> seq(n - 2), degree(n, 1);
  for (auto& s : seq) {
    s = pick(rng);
    ++degree[s];
  }
  EdgeList out;
  for (auto s : seq) {
    for (std::size_t leaf = 0; leaf < n; ++leaf) {
      if (degree[leaf] == 1) {
        out.emplace_back(leaf, s);
        --degree[leaf];
        --degree[s];
        break;
      }
    }
  }
  std::vector<std::size_t> rest;
  for (std::size_t v = 0; v < n; ++v)
    if (degree[v] == 1) rest.push_back(v);
  out.emplace_back(rest[0], rest[1]);
  return out;
}

}  // namespace

TEST_CASE("distance") {
  CHECK(distance(1.0) == 0.0);
  CHECK(distance(-1.0) == 2.0);
  CHECK(distance(0.815) == doctest::Approx(std::sqrt(0.37)).epsilon(1e-15));
  CHECK(distance(0.815) == doctest::Approx(0.60828).epsilon(1e-5));
  CHECK(distance(0.2) > distance(0.3));
  try {
    distance(1.5);
    FAIL("expected OutOfRange");
  } catch (const DomainError& e) {
    CHECK(e.code() == ErrorCode::OutOfRange);
  }
}

TEST_CASE("mst of two nodes is their edge") {
  CorrelationMatrix c;
  c.sectors = {"A", "B"};
  c.values = {1, 0.3, 0.3, 1};
  auto g = mst(c);
  REQUIRE(g.edges.size() == 1);
  CHECK(g.edges[0].correlation == 0.3);
  CHECK(g.kind == GraphKind::MST);
}

TEST_CASE("mst weight equals the minimum over all spanning trees") {
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 3 + trial % 5;  // 3..7
    auto c = random_matrix(rng, n);
    auto g = mst(c);
    REQUIRE(g.edges.size() == n - 1);
    std::vector<double> w(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) w[i * n + j] = distance(c(i, j));
    CHECK(weight(g) == doctest::Approx(oracle::min_spanning_weight(n, w)).epsilon(1e-12));
  }
}

TEST_CASE("mst is a function of the correlation order only") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    auto c = random_matrix(rng, 10);
    auto base = pairs(mst(c));
    auto moved = c;
    for (auto& v : moved.values) {
      if (v != 1.0) v = std::tanh(2.0 * v) * 0.9;
    }
    CHECK(pairs(mst(moved)) == base);
  }
}

TEST_CASE("reference matrix: strongest pair is in the mst") {
  auto c = support::sector_matrix();
  auto g = mst(c);
  CHECK(g.edges.size() == 9);
  CHECK(has_edge(g, "IN", "CY"));
  CHECK(named_edge(g, g.edges.front()) == NamedEdge{"CY", "IN"});
  auto p = pmfg(c);
  CHECK(p.edges.size() == 24);
}

TEST_CASE("pmfg small cases") {
  std::mt19937_64 rng(5);
  auto k4 = pmfg(random_matrix(rng, 4));
  CHECK(k4.edges.size() == 6);

  for (int trial = 0; trial < 20; ++trial) {
    auto c = random_matrix(rng, 5);
    auto g = pmfg(c);
    REQUIRE(g.edges.size() == 9);
    // the one missing edge is the weakest
    std::size_t wi = 0, wj = 1;
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = i + 1; j < 5; ++j)
        if (c(i, j) < c(wi, wj)) wi = i, wj = j;
    CHECK_FALSE(has_edge(g, c.sectors[wi], c.sectors[wj]));
    CHECK(oracle::is_planar(5, pairs(g)));
  }
  CorrelationMatrix two;
  two.sectors = {"A", "B"};
  two.values = {1, 0.1, 0.1, 1};
  CHECK_THROWS_AS(pmfg(two), DomainError);
}

TEST_CASE("pmfg properties on random 10 x 10 matrices") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 10;
    auto c = random_matrix(rng, n);
    auto p = pmfg(c);
    auto t = mst(c);
    REQUIRE(p.edges.size() == 3 * (n - 2));
    auto pe = pairs(p);
    CHECK(oracle::is_planar(n, pe));
    std::set<std::pair<std::size_t, std::size_t>> in(pe.begin(), pe.end());
    for (auto e : pairs(t)) CHECK(in.contains(e));
    // maximal: every missing edge would break planarity
    if (trial < 10) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          if (in.contains({i, j})) continue;
          auto more = pe;
          more.emplace_back(i, j);
          CHECK_FALSE(oracle::is_planar(n, more));
        }
      }
    }
  }
}

TEST_CASE("planarity test agrees with the independent oracle") {
  EdgeList k5, k33;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = i + 1; j < 5; ++j) k5.emplace_back(i, j);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 3; j < 6; ++j) k33.emplace_back(i, j);
  CHECK_FALSE(is_planar(5, k5));
  CHECK_FALSE(oracle::is_planar(5, k5));
  CHECK_FALSE(is_planar(6, k33));
  CHECK_FALSE(oracle::is_planar(6, k33));
  for (std::size_t drop = 0; drop < k5.size(); ++drop) {
    auto sub = k5;
    sub.erase(sub.begin() + static_cast<std::ptrdiff_t>(drop));
    CHECK(is_planar(5, sub));
    CHECK(oracle::is_planar(5, sub));
  }
  // subdivided K3,3 is still non-planar
  EdgeList sub33 = {{0, 3}, {0, 4}, {0, 6}, {6, 5}, {1, 3}, {1, 4}, {1, 5}, {2, 3}, {2, 4}, {2, 5}};
  CHECK_FALSE(is_planar(7, sub33));
  CHECK_FALSE(oracle::is_planar(7, sub33));

  std::mt19937_64 rng(123);
  int planar = 0, nonplanar = 0;
  for (int trial = 0; trial < 400; ++trial) {
    std::size_t n = 5 + trial % 8;
    std::uniform_int_distribution<std::size_t> m(n, 3 * n);
    std::size_t target = m(rng);
    std::set<std::pair<std::size_t, std::size_t>> es;
    std::uniform_int_distribution<std::size_t> v(0, n - 1);
    while (es.size() < std::min(target, n * (n - 1) / 2)) {
      auto a = v(rng), b = v(rng);
      if (a != b) es.insert({std::min(a, b), std::max(a, b)});
    }
    EdgeList list(es.begin(), es.end());
    bool want = oracle::is_planar(n, list);
    CHECK(is_planar(n, list) == want);
    (want ? planar : nonplanar)++;
  }
  CHECK(planar > 50);
  CHECK(nonplanar > 50);
}

TEST_CASE("star and path metrics for every n in 4..16") {
  for (std::size_t n = 4; n <= 16; ++n) {
    EdgeList star, path;
    for (std::size_t v = 1; v < n; ++v) star.emplace_back(0, v);
    for (std::size_t v = 1; v < n; ++v) path.emplace_back(v - 1, v);

    auto s = topology(tree_of(n, star));
    CHECK(s.max_degree == n - 1);
    CHECK(s.diameter == 2);
    CHECK(s.leaf_count == n - 1);
    CHECK(s.mean_occupation_layer == doctest::Approx(double(n - 1) / double(n)));
    CHECK(s.hub == "N00");
    CHECK(s.classification == TopologyClass::StarLike);

    auto p = topology(tree_of(n, path));
    CHECK(p.max_degree == 2);
    CHECK(p.diameter == n - 1);
    CHECK(p.leaf_count == 2);
    CHECK(p.hub == "N01");  // first degree-2 node by name
    double hops = 1.0 + double((n - 2) * (n - 1)) / 2.0;
    CHECK(p.mean_occupation_layer == doctest::Approx(hops / double(n)));
    CHECK(p.classification == TopologyClass::ChainLike);
  }
}

TEST_CASE("topology rejects non-trees") {
  auto g = tree_of(4, {{0, 1}, {1, 2}, {2, 0}});
  try {
    topology(g);
    FAIL("expected NotATree");
  } catch (const DomainError& e) {
    CHECK(e.code() == ErrorCode::NotATree);
  }
  auto split = tree_of(4, {{0, 1}, {2, 3}});
  CHECK_THROWS_AS(topology(split), DomainError);
}

TEST_CASE("tree diff") {
  auto y1 = support::reference_tree("y1");
  auto g1 = support::reference_tree("g1");
  auto d = diff(y1, g1);
  auto broken = d.broken;
  std::sort(broken.begin(), broken.end());
  CHECK(broken == std::vector<NamedEdge>{{"CY", "UT"}, {"IN", "TL"}});
  CHECK(d.formed == std::vector<NamedEdge>{{"NC", "TL"}, {"NC", "UT"}});
  CHECK(d.primitive_count == 2);
  CHECK(d.preserved_backbone.size() == 7);
  CHECK(diff(y1, y1).primitive_count == 0);

  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 4 + trial % 10;
    auto edges = random_tree(rng, n);
    auto a = tree_of(n, edges);
    // re-parent one leaf
    std::vector<std::size_t> degree(n, 0);
    for (auto [x, y] : edges) ++degree[x], ++degree[y];
    std::size_t leaf = 0;
    while (degree[leaf] != 1) ++leaf;
    auto moved = edges;
    for (auto& [x, y] : moved) {
      if (x == leaf || y == leaf) {
        std::size_t parent = x == leaf ? y : x;
        std::size_t other = (parent + 1) % n == leaf ? (parent + 2) % n : (parent + 1) % n;
        x = leaf;
        y = other;
      }
    }
    auto b = tree_of(n, moved);
    auto dd = diff(a, b);
    CHECK(dd.primitive_count == 1);
    CHECK(dd.broken.size() == dd.formed.size());
  }

  auto other = y1;
  other.nodes[0] = "XX";
  try {
    diff(y1, other);
    FAIL("expected NodeSetMismatch");
  } catch (const DomainError& e) {
    CHECK(e.code() == ErrorCode::NodeSetMismatch);
  }
}

TEST_CASE("mst trees diff symmetrically on random matrices") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    auto a = mst(random_matrix(rng, 10));
    auto b = mst(random_matrix(rng, 10));
    auto d = diff(a, b);
    CHECK(d.broken.size() == d.formed.size());
    CHECK(d.broken.size() + d.preserved_backbone.size() == 9);
  }
}

TEST_CASE("dot output") {
  auto c = support::sector_matrix();
  auto t = mst(c);
  auto p = pmfg(c);
  std::ostringstream out;
  write_dot(out, t, {"whole period", {{"IN", 1}}, std::nullopt});
  auto s = out.str();
  CHECK(s.rfind("graph \"whole period\" {", 0) == 0);
  CHECK(s.find("\"CY\" -- \"IN\" [penwidth=4.57, label=\"0.815\"]") != std::string::npos);
  CHECK(s.find("label=\"IN (1)\"") != std::string::npos);
  CHECK(s.find("dashed") == std::string::npos);

  std::ostringstream both;
  write_dot(both, p, {"", {}, t});
  auto b = both.str();
  auto lines = std::count(b.begin(), b.end(), '\n');
  CHECK(lines == 1 + 1 + 10 + 24 + 1);
  std::size_t dashed = 0;
  for (auto pos = b.find("dashed"); pos != std::string::npos; pos = b.find("dashed", pos + 1)) {
    ++dashed;
  }
  CHECK(dashed == 24 - 9);
}

TEST_CASE("a planted hub makes a star") {
  int stars = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto data = generate_synthetic(hub_scenario(10, 1000, 3.0, 1.0, seed, 4));
    auto g = mst(cross_correlation(data.series));
    auto m = topology(g);
    stars += m.classification == TopologyClass::StarLike && m.hub == "HC";
  }
  CHECK(stars >= 95);
}
