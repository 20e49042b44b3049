#include "regime_graph/phase_clustering.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>

#include "regime_graph/error.hpp"
#include "text_util.hpp"

namespace regime_graph {

std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::ExtremelyLow: return "extremely_low";
    case Phase::Low: return "low";
    case Phase::Moderate: return "moderate";
    case Phase::High: return "high";
    case Phase::VeryHigh: return "very_high";
    case Phase::ExtremelyHigh: return "extremely_high";
  }
  return "moderate";
}

std::string_view phase_color(Phase p) {
  switch (p) {
    case Phase::ExtremelyLow: return "black";
    case Phase::Low: return "blue";
    case Phase::Moderate: return "green";
    case Phase::High: return "yellow";
    case Phase::VeryHigh: return "orange";
    case Phase::ExtremelyHigh: return "red";
  }
  return "green";
}

char phase_letter(Phase p) {
  switch (p) {
    case Phase::ExtremelyLow: return 'K';
    case Phase::Low: return 'B';
    case Phase::Moderate: return 'G';
    case Phase::High: return 'Y';
    case Phase::VeryHigh: return 'O';
    case Phase::ExtremelyHigh: return 'R';
  }
  return 'G';
}

Phase parse_phase(std::string_view text) {
  auto t = detail::lower(detail::trim(text));
  for (auto p : kAllPhases) {
    if (t == phase_name(p) || t == phase_color(p)) return p;
  }
  throw DomainError(ErrorCode::ParseError, "unknown phase '" + t + "'");
}

Band band_of(Phase p) {
  switch (p) {
    case Phase::ExtremelyLow:
    case Phase::Low: return Band::Growth;
    case Phase::Moderate: return Band::Correction;
    case Phase::High:
    case Phase::VeryHigh: return Band::Crisis;
    case Phase::ExtremelyHigh: return Band::Crash;
  }
  return Band::Correction;
}

std::string_view band_name(Band b) {
  switch (b) {
    case Band::Growth: return "growth";
    case Band::Correction: return "correction";
    case Band::Crisis: return "crisis";
    case Band::Crash: return "crash";
  }
  return "correction";
}

double segment_distance(const GaussianParams& a, const GaussianParams& b) {
  if (a.count < 2 || b.count < 2) {
    throw DomainError(ErrorCode::InvalidArgument, "segment distance needs counts >= 2");
  }
  const double na = static_cast<double>(a.count);
  const double nb = static_cast<double>(b.count);
  const double n = na + nb;
  const double dm = a.mean - b.mean;
  const double min_var = kMinSigma * kMinSigma;
  double va = std::max(a.std * a.std, min_var);
  double vb = std::max(b.std * b.std, min_var);
  double pooled = (na * a.std * a.std + nb * b.std * b.std) / n + na * nb * dm * dm / (n * n);
  pooled = std::max(pooled, min_var);
  // grouped so that swapping a and b gives the same bits
  double d = 0.5 * (n * std::log(pooled) - (na * std::log(va) + nb * std::log(vb)));
  // Analytically non-negative (concavity of log); clip rounding noise.
  return d < 0.0 ? 0.0 : d;
}

ClusterTree complete_link(std::size_t n, std::span<const double> distances) {
  if (n < 2) throw DomainError(ErrorCode::TooFewSegments, "need at least 2 segments");
  if (distances.size() != n * n) {
    throw DomainError(ErrorCode::InvalidArgument, "distance matrix must be n x n");
  }
  std::vector<double> d(distances.begin(), distances.end());
  std::vector<std::size_t> key(n), node(n), size(n, 1);
  std::vector<bool> active(n, true);
  std::iota(key.begin(), key.end(), 0);
  std::iota(node.begin(), node.end(), 0);

  ClusterTree tree;
  tree.leaf_count = n;
  tree.merges.reserve(n - 1);
  for (std::size_t step = 0; step + 1 < n; ++step) {
    std::size_t ba = n, bb = n;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!active[j]) continue;
        double v = d[i * n + j];
        bool better = ba == n || v < best;
        if (!better && v == best) {
          auto lo = std::minmax(key[i], key[j]);
          auto cur = std::minmax(key[ba], key[bb]);
          better = lo < cur;
        }
        if (better) {
          best = v;
          ba = i;
          bb = j;
        }
      }
    }
    if (key[bb] < key[ba]) std::swap(ba, bb);
    tree.merges.push_back({node[ba], node[bb], best, size[ba] + size[bb]});
    // Slot ba keeps the merged cluster; its key is already the smaller one.
    for (std::size_t c = 0; c < n; ++c) {
      if (!active[c] || c == ba || c == bb) continue;
      double v = std::max(d[ba * n + c], d[bb * n + c]);
      d[ba * n + c] = v;
      d[c * n + ba] = v;
    }
    active[bb] = false;
    size[ba] += size[bb];
    node[ba] = n + step;
  }
  return tree;
}

ClusterTree complete_link_cluster(std::span<const GaussianParams> segments) {
  const std::size_t n = segments.size();
  if (n < 2) throw DomainError(ErrorCode::TooFewSegments, "need at least 2 segments");
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      d[i * n + j] = d[j * n + i] = segment_distance(segments[i], segments[j]);
    }
  }
  return complete_link(n, d);
}

namespace {

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

std::vector<std::size_t> number_by_smallest_leaf(std::vector<std::size_t> group) {
  std::map<std::size_t, std::size_t> ids;
  std::vector<std::size_t> out(group.size());
  for (std::size_t leaf = 0; leaf < group.size(); ++leaf) {
    auto [it, inserted] = ids.try_emplace(group[leaf], ids.size());
    out[leaf] = it->second;
  }
  return out;
}

bool any_value(const PhaseVols& v) {
  return std::any_of(v.begin(), v.end(), [](const auto& x) { return x.has_value(); });
}

std::size_t value_count(const PhaseVols& v) {
  return static_cast<std::size_t>(
      std::count_if(v.begin(), v.end(), [](const auto& x) { return x.has_value(); }));
}

}  // namespace

std::vector<std::size_t> cut_tree(const ClusterTree& tree, std::size_t k) {
  const std::size_t n = tree.leaf_count;
  if (k < 1 || k > n) {
    throw DomainError(ErrorCode::InvalidArgument, "cannot cut tree into " + std::to_string(k) +
                                                      " clusters");
  }
  std::vector<std::size_t> parent(n), rep(n + tree.merges.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::iota(rep.begin(), rep.begin() + static_cast<std::ptrdiff_t>(n), 0);
  for (std::size_t i = 0; i < tree.merges.size(); ++i) {
    const auto& m = tree.merges[i];
    rep[n + i] = rep[m.left];
    if (i < n - k) {
      parent[find_root(parent, rep[m.right])] = find_root(parent, rep[m.left]);
    }
  }
  std::vector<std::size_t> group(n);
  for (std::size_t leaf = 0; leaf < n; ++leaf) group[leaf] = find_root(parent, leaf);
  return number_by_smallest_leaf(group);
}

std::vector<std::size_t> cut_at_nodes(const ClusterTree& tree,
                                      std::span<const std::size_t> roots) {
  const std::size_t n = tree.leaf_count;
  const std::size_t total = n + tree.merges.size();
  constexpr auto kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> group(n, kNone);
  for (auto root : roots) {
    if (root >= total) {
      throw DomainError(ErrorCode::InvalidArgument, "no tree node " + std::to_string(root));
    }
    std::vector<std::size_t> stack{root};
    while (!stack.empty()) {
      auto v = stack.back();
      stack.pop_back();
      if (v < n) {
        if (group[v] != kNone) {
          throw DomainError(ErrorCode::InvalidArgument, "cluster roots overlap at leaf " +
                                                            std::to_string(v));
        }
        group[v] = root;
      } else {
        stack.push_back(tree.merges[v - n].left);
        stack.push_back(tree.merges[v - n].right);
      }
    }
  }
  for (std::size_t leaf = 0; leaf < n; ++leaf) {
    if (group[leaf] == kNone) group[leaf] = total + leaf;
  }
  return number_by_smallest_leaf(group);
}

PhaseVols ReferenceVols::generic() const {
  PhaseVols out;
  for (std::size_t p = 0; p < kPhaseCount; ++p) {
    double sum = 0.0;
    int count = 0;
    for (const auto& [name, row] : rows) {
      if (row[p]) {
        sum += *row[p];
        ++count;
      }
    }
    if (count > 0) out[p] = sum / count;
  }
  return out;
}

PhaseVols ReferenceVols::row_for(const std::string& sector) const {
  auto it = rows.find(sector);
  return it == rows.end() ? generic() : it->second;
}

ReferenceVols default_reference_vols() {
  constexpr std::optional<double> none;
  ReferenceVols v;
  v.rows["BM"] = {none, 0.0016, 0.0037, 0.0046, 0.0069, 0.0146};
  v.rows["CY"] = {0.0005, 0.0015, 0.0023, 0.0031, 0.0053, 0.0121};
  v.rows["EN"] = {0.0010, 0.0014, 0.0027, 0.0037, 0.0058, 0.0152};
  v.rows["FN"] = {0.0007, 0.0016, 0.0024, 0.0039, 0.0058, 0.0134};
  v.rows["HC"] = {none, 0.0006, 0.0016, 0.0023, 0.0041, 0.0076};
  v.rows["IN"] = {none, 0.0013, 0.0022, 0.0035, 0.0056, 0.0140};
  v.rows["NC"] = {none, 0.0009, 0.0015, 0.0022, 0.0034, 0.0085};
  v.rows["TC"] = {none, 0.0019, 0.0030, 0.0042, 0.0082, 0.0121};
  v.rows["TL"] = {none, 0.0008, 0.0018, 0.0024, 0.0033, 0.0078};
  v.rows["UT"] = {none, 0.0014, 0.0023, 0.0030, 0.0038, 0.0088};
  return v;
}

ReferenceVols parse_reference_vols(std::istream& in) {
  ReferenceVols out;
  std::string line;
  bool header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto f = detail::split_csv(t);
    if (!header) {
      if (f.size() != kPhaseCount + 1 || detail::lower(f[0]) != "sector") {
        throw DomainError(ErrorCode::ParseError,
                          "reference volatility header must be sector + 6 phase columns");
      }
      for (std::size_t p = 0; p < kPhaseCount; ++p) {
        if (parse_phase(f[p + 1]) != kAllPhases[p]) {
          throw DomainError(ErrorCode::ParseError,
                            "reference volatility columns must be in phase order");
        }
      }
      header = true;
      continue;
    }
    if (f.size() != kPhaseCount + 1) {
      throw DomainError(ErrorCode::ParseError,
                        "line " + std::to_string(line_no) + ": expected 7 fields");
    }
    PhaseVols row;
    for (std::size_t p = 0; p < kPhaseCount; ++p) {
      if (f[p + 1] == "-" || f[p + 1].empty()) continue;
      double v = detail::parse_double(f[p + 1], line_no);
      if (!(v > 0.0)) {
        throw DomainError(ErrorCode::ParseError,
                          "line " + std::to_string(line_no) + ": volatility must be positive");
      }
      row[p] = v;
    }
    out.rows[f[0]] = row;
  }
  return out;
}

void write_reference_vols(std::ostream& out, const ReferenceVols& vols) {
  out << "sector";
  for (auto p : kAllPhases) out << ',' << phase_name(p);
  out << '\n';
  for (const auto& [sector, row] : vols.rows) {
    out << sector;
    for (const auto& v : row) out << ',' << (v ? detail::format_double(*v) : "-");
    out << '\n';
  }
}

KChoice choose_k(const ClusterTree& tree, const PhaseSelectionConfig& config) {
  if (config.k_min < 1 || config.k_max < config.k_min) {
    throw DomainError(ErrorCode::InvalidArgument, "invalid k range");
  }
  std::vector<double> h;
  for (const auto& m : tree.merges) h.push_back(m.height);
  std::sort(h.begin(), h.end(), std::greater<>());
  const std::size_t n = tree.leaf_count;

  KChoice choice;
  auto height = [&](std::size_t i) { return i < h.size() ? h[i] : 0.0; };
  auto range_for = [&](std::size_t k) {
    double hi = k >= 2 ? height(k - 2) : std::numeric_limits<double>::infinity();
    return std::make_pair(height(k - 1), hi);
  };
  if (n < config.k_min) {
    choice.k = std::max<std::size_t>(n, 1);
    std::tie(choice.threshold_lo, choice.threshold_hi) = range_for(choice.k);
    choice.degenerate = true;
    return choice;
  }
  const std::size_t k_hi = std::min(config.k_max, n);
  double best_gap = -1.0;
  for (std::size_t k = config.k_min; k <= k_hi; ++k) {
    auto [lo, hi] = range_for(k);
    double gap = hi - lo;
    if (gap > best_gap) {
      best_gap = gap;
      choice.k = k;
      choice.threshold_lo = lo;
      choice.threshold_hi = hi;
    }
  }
  choice.degenerate =
      h.empty() || std::all_of(h.begin(), h.end(), [&](double v) { return v == h.front(); });
  if (choice.degenerate) {
    choice.k = config.k_min;
    std::tie(choice.threshold_lo, choice.threshold_hi) = range_for(choice.k);
  }
  return choice;
}

std::vector<Phase> label_clusters(std::span<const double> ascending_vols,
                                  const PhaseVols& reference) {
  const std::size_t k = ascending_vols.size();
  std::vector<std::size_t> avail;
  for (std::size_t p = 0; p < kPhaseCount; ++p) {
    if (reference[p]) avail.push_back(p);
  }
  if (k > avail.size()) {
    throw DomainError(ErrorCode::InvalidArgument,
                      std::to_string(k) + " clusters but only " + std::to_string(avail.size()) +
                          " reference phases");
  }
  const std::size_t m = avail.size();
  auto cost = [&](std::size_t i, std::size_t j) {
    double v = std::max(ascending_vols[i], kMinSigma);
    return std::abs(std::log(v / *reference[avail[j]]));
  };
  // best[i][j]: minimal cost assigning clusters 0..i with cluster i -> avail[j].
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> best(k, std::vector<double>(m, inf));
  std::vector<std::vector<std::size_t>> from(k, std::vector<std::size_t>(m, 0));
  for (std::size_t j = 0; j < m; ++j) best[0][j] = cost(0, j);
  for (std::size_t i = 1; i < k; ++i) {
    double run = inf;
    std::size_t arg = 0;
    for (std::size_t j = 1; j < m; ++j) {
      if (best[i - 1][j - 1] < run) {
        run = best[i - 1][j - 1];
        arg = j - 1;
      }
      if (run < inf) {
        best[i][j] = run + cost(i, j);
        from[i][j] = arg;
      }
    }
  }
  std::size_t j = 0;
  for (std::size_t c = 1; c < m; ++c) {
    if (best[k - 1][c] < best[k - 1][j]) j = c;
  }
  std::vector<Phase> out(k);
  for (std::size_t i = k; i-- > 0;) {
    out[i] = kAllPhases[avail[j]];
    if (i > 0) j = from[i][j];
  }
  return out;
}

namespace {

PhaseAssignment assign_from_groups(std::span<const Segment> segments,
                                   const std::vector<std::size_t>& group, std::size_t k,
                                   const PhaseVols& reference) {
  std::vector<double> sum(k, 0.0);
  std::vector<std::size_t> count(k, 0);
  for (std::size_t i = 0; i < segments.size(); ++i) {
    sum[group[i]] += segments[i].params.std;
    ++count[group[i]];
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> mean(k);
  for (std::size_t g = 0; g < k; ++g) mean[g] = sum[g] / static_cast<double>(count[g]);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return mean[a] < mean[b]; });
  std::vector<double> vols;
  std::vector<std::size_t> rank(k);
  for (std::size_t r = 0; r < k; ++r) {
    vols.push_back(mean[order[r]]);
    rank[order[r]] = r;
  }
  PhaseVols ref = reference;
  if (value_count(ref) < k) ref = default_reference_vols().generic();
  auto labels = label_clusters(vols, ref);

  PhaseAssignment out;
  out.k = k;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    PhasedSegment ps;
    ps.start = segments[i].start;
    ps.end = segments[i].end;
    ps.start_ts = segments[i].start_ts;
    ps.end_ts = segments[i].end_ts;
    ps.params = segments[i].params;
    ps.cluster = rank[group[i]];
    ps.phase = labels[ps.cluster];
    out.segments.push_back(ps);
  }
  return out;
}

}  // namespace

PhaseAssignment select_phases(const ClusterTree& tree, std::span<const Segment> segments,
                              const PhaseVols& reference,
                              const PhaseSelectionConfig& config) {
  if (tree.leaf_count != segments.size()) {
    throw DomainError(ErrorCode::InvalidArgument, "tree and segment list sizes differ");
  }
  auto choice = choose_k(tree, config);
  auto group = cut_tree(tree, choice.k);
  auto out = assign_from_groups(segments, group, choice.k, reference);
  out.threshold_lo = choice.threshold_lo;
  out.threshold_hi = choice.threshold_hi;
  out.degenerate = choice.degenerate;
  return out;
}

PhaseAssignment assign_manual_phases(const ClusterTree& tree,
                                     std::span<const Segment> segments,
                                     std::span<const std::size_t> roots,
                                     const PhaseVols& reference) {
  if (tree.leaf_count != segments.size()) {
    throw DomainError(ErrorCode::InvalidArgument, "tree and segment list sizes differ");
  }
  auto group = cut_at_nodes(tree, roots);
  std::size_t k = 1 + *std::max_element(group.begin(), group.end());
  auto out = assign_from_groups(segments, group, k, reference);
  out.manual = true;
  return out;
}

PhaseAssignment cluster_segmentation(const Segmentation& seg, const ReferenceVols& vols,
                                     const PhaseSelectionConfig& config) {
  PhaseVols ref = vols.row_for(seg.sector);
  if (!any_value(ref)) ref = default_reference_vols().generic();
  PhaseAssignment out;
  if (seg.segments.size() < 2) {
    std::vector<std::size_t> group(seg.segments.size(), 0);
    out = assign_from_groups(seg.segments, group, 1, ref);
    out.degenerate = true;
  } else {
    std::vector<GaussianParams> params;
    for (const auto& s : seg.segments) params.push_back(s.params);
    auto tree = complete_link_cluster(params);
    out = select_phases(tree, seg.segments, ref, config);
  }
  out.sector = seg.sector;
  out.data_hash = seg.data_hash;
  return out;
}

std::map<std::string, int> rank_entries(const std::map<std::string, SectorWindow>& windows) {
  std::vector<std::pair<Timestamp, std::string>> starts;
  for (const auto& [sector, w] : windows) starts.emplace_back(w.start_ts, sector);
  std::sort(starts.begin(), starts.end());
  std::map<std::string, int> ranks;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    int r = (i > 0 && starts[i].first == starts[i - 1].first) ? ranks[starts[i - 1].second]
                                                               : static_cast<int>(i) + 1;
    ranks[starts[i].second] = r;
  }
  return ranks;
}

namespace {

struct BandRun {
  std::string sector;
  Band band = Band::Correction;
  Phase phase = Phase::Moderate;
  Timestamp start_ts = 0;
  Timestamp end_ts = 0;
};

std::vector<BandRun> band_runs(const PhaseAssignment& a) {
  std::vector<BandRun> runs;
  std::array<std::size_t, kPhaseCount> weight{};
  auto close = [&]() {
    if (runs.empty()) return;
    std::size_t best = 0;
    for (std::size_t p = 1; p < kPhaseCount; ++p) {
      if (weight[p] > weight[best]) best = p;
    }
    runs.back().phase = kAllPhases[best];
    weight.fill(0);
  };
  for (const auto& s : a.segments) {
    Band b = band_of(s.phase);
    if (runs.empty() || runs.back().band != b) {
      close();
      runs.push_back({a.sector, b, s.phase, s.start_ts, s.end_ts});
    }
    runs.back().end_ts = s.end_ts;
    weight[static_cast<std::size_t>(s.phase)] += s.params.count;
  }
  close();
  return runs;
}

}  // namespace

std::vector<CorrespondingSegment> match_corresponding(
    const std::map<std::string, PhaseAssignment>& assignments, const MatchConfig& config) {
  std::vector<BandRun> runs;
  for (const auto& [sector, a] : assignments) {
    auto r = band_runs(a);
    for (auto& run : r) run.sector = sector;
    runs.insert(runs.end(), r.begin(), r.end());
  }
  std::stable_sort(runs.begin(), runs.end(), [](const BandRun& a, const BandRun& b) {
    return std::tie(a.start_ts, a.sector) < std::tie(b.start_ts, b.sector);
  });

  std::vector<bool> used(runs.size(), false);
  std::vector<CorrespondingSegment> out;
  std::map<char, int> ordinal;
  for (std::size_t e = 0; e < runs.size(); ++e) {
    if (used[e]) continue;
    const auto& opener = runs[e];
    std::vector<std::size_t> members{e};
    std::set<std::string> sectors{opener.sector};
    Timestamp common_end = opener.end_ts;
    for (std::size_t j = e + 1;
         j < runs.size() && runs[j].start_ts <= opener.start_ts + config.window_seconds; ++j) {
      const auto& r = runs[j];
      if (used[j] || r.band != opener.band || sectors.contains(r.sector)) continue;
      if (r.start_ts > common_end) continue;
      members.push_back(j);
      sectors.insert(r.sector);
      common_end = std::min(common_end, r.end_ts);
    }
    if (members.size() < config.min_sector_coverage) continue;

    CorrespondingSegment cs;
    std::array<int, kPhaseCount> votes{};
    for (auto j : members) {
      used[j] = true;
      cs.windows[runs[j].sector] = {runs[j].start_ts, runs[j].end_ts, runs[j].phase};
      ++votes[static_cast<std::size_t>(runs[j].phase)];
    }
    std::size_t dom = 0;
    for (std::size_t p = 1; p < kPhaseCount; ++p) {
      if (votes[p] > votes[dom]) dom = p;
    }
    cs.dominant_phase = kAllPhases[dom];
    char letter = phase_letter(cs.dominant_phase);
    cs.id = std::string("P") + letter + std::to_string(++ordinal[letter]);
    cs.entry_ranks = rank_entries(cs.windows);
    for (const auto& [sector, a] : assignments) {
      if (!cs.windows.contains(sector)) cs.absent.push_back(sector);
    }
    out.push_back(std::move(cs));
  }
  return out;
}

void apply_names(std::vector<CorrespondingSegment>& segments,
                 const std::map<std::string, std::string>& names) {
  for (auto& s : segments) {
    auto it = names.find(s.id);
    if (it != names.end()) s.id = it->second;
  }
}

void write_rank_table(std::ostream& out, std::span<const CorrespondingSegment> segments,
                      std::span<const std::string> sectors) {
  out << "segment";
  for (const auto& s : sectors) out << ',' << s;
  out << '\n';
  for (const auto& cs : segments) {
    out << cs.id;
    for (const auto& s : sectors) {
      auto it = cs.entry_ranks.find(s);
      out << ',';
      if (it == cs.entry_ranks.end()) {
        out << '-';
      } else {
        out << it->second;
      }
    }
    out << '\n';
  }
}

void write_heatmap_csv(std::ostream& out, std::span<const PhaseAssignment> assignments) {
  out << "sector,start_ts,end_ts,phase\n";
  for (const auto& a : assignments) {
    for (const auto& s : a.segments) {
      out << a.sector << ',' << s.start_ts << ',' << s.end_ts << ',' << phase_color(s.phase)
          << '\n';
    }
  }
}

}  // namespace regime_graph
