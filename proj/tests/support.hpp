#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "regime_graph/correlation.hpp"
#include "regime_graph/market_data.hpp"
#include "regime_graph/market_graphs.hpp"
#include "regime_graph/phase_clustering.hpp"
#include "regime_graph/serialization.hpp"

#ifndef REGIME_GRAPH_FIXTURES
#error "REGIME_GRAPH_FIXTURES must point at tests/fixtures"
#endif

namespace support {

using namespace regime_graph;

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(REGIME_GRAPH_FIXTURES) / name;
}

inline std::vector<double> normal_draws(std::mt19937_64& rng, std::size_t n, double sigma = 1.0,
                                        double mu = 0.0) {
  std::normal_distribution<double> d(mu, sigma);
  std::vector<double> out(n);
  for (auto& v : out) v = d(rng);
  return out;
}

// Concatenated Gaussian blocks.
inline std::vector<double> piecewise(std::uint64_t seed,
                                     const std::vector<std::pair<std::size_t, double>>& blocks) {
  std::mt19937_64 rng(seed);
  std::vector<double> out;
  for (auto [len, sigma] : blocks) {
    auto part = normal_draws(rng, len, sigma);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

inline CorrelationMatrix sector_matrix() {
  std::ifstream in(fixture("sector_matrix.csv"));
  return parse_matrix_csv(in);
}

inline CorrelationGraph reference_tree(const std::string& which) {
  return read_envelope(fixture("tree_" + which + ".json"), "graph")
      .payload.get<CorrelationGraph>();
}

struct CrisisWindows {
  std::map<std::string, PhaseAssignment> assignments;
  CorrespondingSegment target;
};

// Pairs each sector's rows into a phase assignment and takes the
// high/extremely_high row of every sector as its window in the event.
inline CrisisWindows crisis_windows() {
  std::ifstream in(fixture("crisis_windows.csv"));
  std::string line;
  CrisisWindows t;
  t.target.id = "Y1";
  t.target.dominant_phase = Phase::High;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("sector,", 0) == 0) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    auto phase = parse_phase(f[1]);
    Timestamp start = parse_timestamp(f[2] + "T10:00:00Z");
    Timestamp end = parse_timestamp(f[3] + "T16:00:00Z");
    auto& a = t.assignments[f[0]];
    a.sector = f[0];
    PhasedSegment seg;
    seg.start_ts = start;
    seg.end_ts = end;
    seg.phase = phase;
    a.segments.push_back(seg);
    if (phase == Phase::High || phase == Phase::ExtremelyHigh) {
      t.target.windows[f[0]] = {start, end, phase};
    }
  }
  return t;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace support
