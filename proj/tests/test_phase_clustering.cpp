#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "regime_graph/error.hpp"
#include "regime_graph/phase_clustering.hpp"
#include "regime_graph/synthetic.hpp"
#include "support.hpp"

using namespace regime_graph;

namespace {

// Raw sample whose MLE summary is exactly (mu, sigma, n).
std::vector<double> sample_with(std::mt19937_64& rng, double mu, double sigma, std::size_t n) {
  auto z = support::normal_draws(rng, n);
  auto fit = oracle::mle(z);
  for (auto& v : z) v = mu + sigma * (v - fit.first) / fit.second;
  return z;
}

double raw_distance(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  auto fa = oracle::mle(a), fb = oracle::mle(b), fp = oracle::mle(pooled);
  return oracle::gaussian_loglik(a, fa.first, fa.second) +
         oracle::gaussian_loglik(b, fb.first, fb.second) -
         oracle::gaussian_loglik(pooled, fp.first, fp.second);
}

// Chain tree: leaf i+1 joins the growing cluster at heights[i].
ClusterTree chain(const std::vector<double>& heights) {
  ClusterTree t;
  t.leaf_count = heights.size() + 1;
  std::size_t node = 0;
  for (std::size_t i = 0; i < heights.size(); ++i) {
    t.merges.push_back({node, i + 1, heights[i], i + 2});
    node = t.leaf_count + i;
  }
  return t;
}

PhasedSegment span_of(Timestamp a, Timestamp b, Phase p) {
  PhasedSegment s;
  s.start_ts = a;
  s.end_ts = b;
  s.phase = p;
  s.params = {0.0, 0.01, 100};
  return s;
}

constexpr Timestamp kDay = 86400;

// Moderate, then high from `entry` for 40 days, then moderate again.
PhaseAssignment entering(const std::string& sector, Timestamp origin, Timestamp entry) {
  PhaseAssignment a;
  a.sector = sector;
  a.segments.push_back(span_of(origin, entry - 1800, Phase::Moderate));
  a.segments.push_back(span_of(entry, entry + 40 * kDay, Phase::High));
  a.segments.push_back(span_of(entry + 40 * kDay + 1800, origin + 200 * kDay, Phase::Moderate));
  return a;
}

PhaseAssignment calm(const std::string& sector, Timestamp origin) {
  PhaseAssignment a;
  a.sector = sector;
  a.segments.push_back(span_of(origin, origin + 200 * kDay, Phase::Moderate));
  return a;
}

const CorrespondingSegment* crisis_event(const std::vector<CorrespondingSegment>& events) {
  const CorrespondingSegment* found = nullptr;
  for (const auto& e : events) {
    if (band_of(e.dominant_phase) == Band::Crisis) {
      CHECK(found == nullptr);
      found = &e;
    }
  }
  return found;
}

}  // namespace

TEST_CASE("segment distance") {
  GaussianParams a{0.0, 1.0, 100};
  CHECK(segment_distance(a, a) == 0.0);

  std::mt19937_64 rng(5);
  auto xa = sample_with(rng, 0.0, 1.0, 100);
  auto xb = sample_with(rng, 0.0, 2.0, 100);
  double raw = raw_distance(xa, xb);
  double summary = segment_distance(fit_gaussian(xa), fit_gaussian(xb));
  CHECK(std::abs(raw - summary) <= 1e-9 * std::max(1.0, raw));
  CHECK(summary > 0.0);

  std::uniform_real_distribution<double> mu(-1.0, 1.0), sig(0.1, 3.0);
  std::uniform_int_distribution<std::size_t> cnt(2, 400);
  for (int trial = 0; trial < 200; ++trial) {
    GaussianParams p{mu(rng), sig(rng), cnt(rng)}, q{mu(rng), sig(rng), cnt(rng)};
    double d = segment_distance(p, q);
    CHECK(d >= 0.0);
    CHECK(d == segment_distance(q, p));
    if (trial < 40) {
      auto rp = sample_with(rng, p.mean, p.std, p.count);
      auto rq = sample_with(rng, q.mean, q.std, q.count);
      double want = raw_distance(rp, rq);
      CHECK(std::abs(d - want) <= 1e-9 * std::max(1.0, want));
    }
  }
  CHECK_THROWS_AS(segment_distance({0.0, 1.0, 1}, a), DomainError);
}

TEST_CASE("complete link matches a from-scratch agglomeration") {
  std::mt19937_64 rng(606);
  std::uniform_int_distribution<std::size_t> size(2, 8);
  std::uniform_int_distribution<int> coarse(0, 4);
  std::uniform_real_distribution<double> fine(0.0, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t n = size(rng);
    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        // every other trial uses coarse integers so ties are common
        d[i * n + j] = d[j * n + i] = trial % 2 ? coarse(rng) : fine(rng);
      }
    }
    auto tree = complete_link(n, d);
    auto want = oracle::complete_link(n, d);
    REQUIRE(tree.merges.size() == n - 1);
    REQUIRE(want.size() == n - 1);
    for (std::size_t k = 0; k < n - 1; ++k) {
      CHECK(tree.merges[k].left == want[k].left);
      CHECK(tree.merges[k].right == want[k].right);
      CHECK(tree.merges[k].height == want[k].height);
      if (k > 0) CHECK(tree.merges[k].height >= tree.merges[k - 1].height);
    }
    CHECK(tree.merges.back().size == n);
  }
}

TEST_CASE("two segments merge once at their distance") {
  std::vector<GaussianParams> p = {{0.0, 1.0, 50}, {0.1, 2.0, 80}};
  auto tree = complete_link_cluster(p);
  REQUIRE(tree.merges.size() == 1);
  CHECK(tree.merges[0].height == segment_distance(p[0], p[1]));
  CHECK(tree.merges[0].left == 0);
  CHECK(tree.merges[0].right == 1);
  std::vector<GaussianParams> one = {{0.0, 1.0, 50}};
  try {
    complete_link_cluster(one);
    FAIL("expected TooFewSegments");
  } catch (const DomainError& e) {
    CHECK(e.code() == ErrorCode::TooFewSegments);
  }
}

TEST_CASE("widest uniform threshold picks four clusters for the quoted heights") {
  auto tree = chain({1.0, 31.3, 34.4, 42.7, 102.2, 200.0, 300.0});
  auto c = choose_k(tree);
  CHECK(c.k == 4);
  CHECK(c.threshold_lo == 42.7);
  CHECK(c.threshold_hi == 102.2);
  CHECK_FALSE(c.degenerate);

  PhaseSelectionConfig wide{2, 6};
  CHECK(choose_k(tree, wide).k == 2);  // 300 - 200 beats 102.2 - 42.7
}

TEST_CASE("one tall merge: the in-range tie goes to the smallest k") {
  auto tree = chain({1, 1, 1, 1, 1, 1, 1, 1, 100});
  CHECK(choose_k(tree, {2, 6}).k == 2);
  auto c = choose_k(tree);
  CHECK(c.k == 4);
  CHECK(c.threshold_hi - c.threshold_lo == 0.0);
  CHECK_FALSE(c.degenerate);
}

TEST_CASE("all-equal heights are flagged degenerate") {
  auto tree = chain({5, 5, 5, 5, 5, 5});
  auto c = choose_k(tree, {5, 6});
  CHECK(c.degenerate);
  CHECK(c.k == 5);
}

TEST_CASE("cut_tree and manual roots") {
  auto tree = chain({1.0, 2.0, 3.0, 4.0});  // leaves 0..4, nodes 5..8
  CHECK(cut_tree(tree, 1) == std::vector<std::size_t>{0, 0, 0, 0, 0});
  CHECK(cut_tree(tree, 2) == std::vector<std::size_t>{0, 0, 0, 0, 1});
  CHECK(cut_tree(tree, 5) == std::vector<std::size_t>{0, 1, 2, 3, 4});
  CHECK_THROWS_AS(cut_tree(tree, 6), DomainError);

  std::vector<std::size_t> roots{6};  // {0,1,2}
  CHECK(cut_at_nodes(tree, roots) == std::vector<std::size_t>{0, 0, 0, 1, 2});
  std::vector<std::size_t> overlap{6, 5};
  CHECK_THROWS_AS(cut_at_nodes(tree, overlap), DomainError);

  std::vector<Segment> segs(5);
  for (std::size_t i = 0; i < 5; ++i) segs[i].params = {0.0, 0.001 * (i + 1), 50};
  auto ref = default_reference_vols().row_for("BM");
  auto manual = assign_manual_phases(tree, segs, roots, ref);
  CHECK(manual.manual);
  CHECK(manual.k == 3);
}

TEST_CASE("four planted volatility levels are recovered and labelled") {
  const std::vector<double> levels = {0.0016, 0.0037, 0.0046, 0.0069};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 rng(seed);
    Segmentation seg;
    seg.sector = "BM";
    std::vector<std::size_t> planted;
    for (int rep = 0; rep < 3; ++rep) {
      for (std::size_t l = 0; l < levels.size(); ++l) {
        auto x = support::normal_draws(rng, 600, levels[l]);
        Segment s;
        s.params = fit_gaussian(x);
        seg.segments.push_back(s);
        planted.push_back(l);
      }
    }
    auto a = cluster_segmentation(seg, default_reference_vols());
    CHECK(a.k == 4);
    const Phase names[] = {Phase::Low, Phase::Moderate, Phase::High, Phase::VeryHigh};
    for (std::size_t i = 0; i < planted.size(); ++i) {
      CHECK(a.segments[i].phase == names[planted[i]]);
    }
  }
}

TEST_CASE("phase order follows mean cluster volatility") {
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> sig(0.0005, 0.02);
  std::uniform_int_distribution<std::size_t> count(13, 500), many(6, 14);
  for (int trial = 0; trial < 50; ++trial) {
    Segmentation seg;
    seg.sector = trial % 3 ? "IN" : "nowhere";
    std::size_t n = many(rng);
    for (std::size_t i = 0; i < n; ++i) {
      Segment s;
      s.params = {0.0, sig(rng), count(rng)};
      seg.segments.push_back(s);
    }
    auto a = cluster_segmentation(seg, default_reference_vols());
    REQUIRE(a.segments.size() == n);
    CHECK(a.k >= 4);
    CHECK(a.k <= 6);
    std::map<std::size_t, std::pair<double, int>> by_cluster;
    std::map<std::size_t, Phase> label;
    for (const auto& s : a.segments) {
      by_cluster[s.cluster].first += s.params.std;
      ++by_cluster[s.cluster].second;
      auto [it, fresh] = label.try_emplace(s.cluster, s.phase);
      CHECK(it->second == s.phase);
    }
    CHECK(by_cluster.size() == a.k);
    double prev = -1.0;
    for (const auto& [c, acc] : by_cluster) {
      double m = acc.first / acc.second;
      CHECK(m >= prev);
      prev = m;
      if (c > 0) CHECK(static_cast<int>(label[c]) > static_cast<int>(label[c - 1]));
    }
  }
}

TEST_CASE("label_clusters uses the nearest increasing phases") {
  auto ref = default_reference_vols().row_for("BM");
  std::vector<double> vols = {0.0016, 0.0046, 0.0146};
  auto l = label_clusters(vols, ref);
  CHECK(l == std::vector<Phase>{Phase::Low, Phase::High, Phase::ExtremelyHigh});
  std::vector<double> seven(7, 0.01);
  CHECK_THROWS_AS(label_clusters(seven, ref), DomainError);
}

TEST_CASE("reference volatility CSV round trip") {
  auto v = default_reference_vols();
  std::ostringstream out;
  write_reference_vols(out, v);
  std::istringstream in(out.str());
  auto back = parse_reference_vols(in);
  CHECK(back.rows == v.rows);
  std::istringstream bad("sector,low\nBM,1\n");
  CHECK_THROWS_AS(parse_reference_vols(bad), DomainError);
}

TEST_CASE("all sectors entering on one day tie at rank 1") {
  const Timestamp origin = parse_timestamp("2007-06-01T09:30:00Z");
  const Timestamp entry = origin + 50 * kDay;
  std::map<std::string, PhaseAssignment> in;
  for (const auto& s : sector_symbols()) in[s] = entering(s, origin, entry);
  auto events = match_corresponding(in);
  auto* e = crisis_event(events);
  REQUIRE(e != nullptr);
  CHECK(e->dominant_phase == Phase::High);
  CHECK(e->id == "PY1");
  CHECK(e->windows.size() == 10);
  CHECK(e->absent.empty());
  for (const auto& [sector, r] : e->entry_ranks) CHECK(r == 1);
}

TEST_CASE("staggered entries rank in stagger order") {
  const Timestamp origin = parse_timestamp("2007-06-01T09:30:00Z");
  const auto& names = sector_symbols();
  std::map<std::string, PhaseAssignment> in;
  // eight sectors enter over two weeks, in reverse alphabetical order
  for (std::size_t i = 0; i < 8; ++i) {
    in[names[7 - i]] = entering(names[7 - i], origin, origin + (50 + 2 * static_cast<int>(i)) * kDay);
  }
  in[names[8]] = calm(names[8], origin);
  in[names[9]] = calm(names[9], origin);
  auto events = match_corresponding(in);
  auto* e = crisis_event(events);
  REQUIRE(e != nullptr);
  CHECK(e->windows.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) CHECK(e->entry_ranks.at(names[7 - i]) == int(i) + 1);
  CHECK(e->absent == std::vector<std::string>{names[8], names[9]});

  // too few sectors: no event
  MatchConfig strict;
  strict.min_sector_coverage = 9;
  CHECK(crisis_event(match_corresponding(in, strict)) == nullptr);

  SUBCASE("translation invariance") {
    for (Timestamp shift : {Timestamp(3 * kDay), Timestamp(-40 * kDay), Timestamp(1800)}) {
      auto moved = in;
      for (auto& [s, a] : moved) {
        for (auto& seg : a.segments) {
          seg.start_ts += shift;
          seg.end_ts += shift;
        }
      }
      auto again = match_corresponding(moved);
      REQUIRE(again.size() == events.size());
      for (std::size_t k = 0; k < events.size(); ++k) {
        CHECK(again[k].id == events[k].id);
        CHECK(again[k].entry_ranks == events[k].entry_ranks);
        CHECK(again[k].absent == events[k].absent);
        for (const auto& [s, w] : events[k].windows) {
          CHECK(again[k].windows.at(s).start_ts == w.start_ts + shift);
        }
      }
    }
  }
}

TEST_CASE("empty input is a valid result") {
  std::map<std::string, PhaseAssignment> none;
  CHECK(match_corresponding(none).empty());
}

TEST_CASE("rank table and heatmap formats") {
  CorrespondingSegment cs;
  cs.id = "Y1";
  cs.entry_ranks = {{"BM", 2}, {"CY", 1}};
  std::vector<CorrespondingSegment> list{cs};
  std::vector<std::string> cols = {"BM", "CY", "EN"};
  std::ostringstream out;
  write_rank_table(out, list, cols);
  CHECK(out.str() == "segment,BM,CY,EN\nY1,2,1,-\n");

  auto named = list;
  apply_names(named, {{"Y1", "crisis"}, {"Z9", "x"}});
  CHECK(named[0].id == "crisis");

  PhaseAssignment a;
  a.sector = "BM";
  a.segments.push_back(span_of(0, 1800, Phase::ExtremelyHigh));
  std::vector<PhaseAssignment> as{a};
  std::ostringstream hm;
  write_heatmap_csv(hm, as);
  CHECK(hm.str() == "sector,start_ts,end_ts,phase\nBM,0,1800,red\n");

  CHECK(parse_phase("orange") == Phase::VeryHigh);
  CHECK(parse_phase("Extremely_Low") == Phase::ExtremelyLow);
  CHECK_THROWS_AS(parse_phase("purple"), DomainError);
}
