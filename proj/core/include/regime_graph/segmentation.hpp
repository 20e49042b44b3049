#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "regime_graph/market_data.hpp"

namespace regime_graph {

// Standard deviations are clamped below by this before logs are taken, so
// constant windows produce a large finite divergence instead of +inf.
inline constexpr double kMinSigma = 1e-12;

struct GaussianParams {
  double mean = 0.0;
  double std = 0.0;  // maximum-likelihood (divide by n)
  std::size_t count = 0;

  bool operator==(const GaussianParams&) const = default;
};

GaussianParams fit_gaussian(std::span<const double> x);

struct SpectrumPoint {
  std::size_t t = 0;   // size of the left part
  double divergence = 0.0;
  bool clamped = false;  // some sigma hit kMinSigma at this split
};

// Jensen-Shannon divergence between a one-Gaussian and a two-Gaussian fit of
// the window, for every split t in [min_seg_len, n - min_seg_len]:
//   D(t) = n ln s - t ln s_L - (n - t) ln s_R + 1/2
// where s, s_L, s_R are ML standard deviations of the window, x[0, t) and
// x[t, n).
std::vector<SpectrumPoint> divergence_spectrum(std::span<const double> x,
                                               std::size_t min_seg_len);

struct Split {
  std::size_t t = 0;
  double divergence = 0.0;
  bool clamped = false;
};

// Argmax of the spectrum; ties go to the smallest t.
Split best_split(std::span<const double> x, std::size_t min_seg_len);

// Divergence of a single split t of the window.
double divergence_at(std::span<const double> x, std::size_t t);

struct BoundaryOptimization {
  std::vector<std::size_t> boundaries;
  bool converged = false;
  int sweeps = 0;
};

// Boundaries are start indices of the right-hand segment. Each sweep visits
// boundaries left to right and moves each one to the best split of the
// window bounded by its current neighbours (or the series ends).
BoundaryOptimization optimize_boundaries(std::span<const double> x,
                                         std::vector<std::size_t> boundaries,
                                         std::size_t min_seg_len, int max_sweeps = 32);

struct SegmentationConfig {
  double cutoff = 10.0;
  std::size_t min_seg_len = 13;
  std::size_t long_segment_len = 65;
  int max_sweeps = 32;
  bool refine = true;
  double refine_factor = 0.5;
  double refine_floor = 0.5;

  bool operator==(const SegmentationConfig&) const = default;
};

struct Boundary {
  std::size_t index = 0;  // first sample of the right-hand segment
  Timestamp timestamp = 0;
  double divergence = 0.0;  // within the flanking boundaries
  bool refined = false;

  bool operator==(const Boundary&) const = default;
};

struct Segment {
  std::size_t start = 0;
  std::size_t end = 0;  // inclusive
  Timestamp start_ts = 0;
  Timestamp end_ts = 0;
  GaussianParams params;

  std::size_t length() const { return end - start + 1; }
  bool operator==(const Segment&) const = default;
};

struct Segmentation {
  std::string sector;
  std::uint64_t data_hash = 0;
  std::size_t n = 0;
  std::size_t min_seg_len = 0;
  double cutoff = 0.0;
  std::vector<Boundary> boundaries;
  std::vector<Segment> segments;
  bool converged = true;
  bool clamped = false;  // a zero-variance window was encountered

  bool operator==(const Segmentation&) const = default;
};

std::uint64_t hash_series(std::span<const double> x);

// Optimized binary recursive segmentation with the Delta_0 termination rule,
// followed by refinement of segments longer than long_segment_len.
Segmentation recursive_segment(std::span<const double> x,
                               const SegmentationConfig& config = {});

Segmentation segment_series(const ReturnSeries& series,
                            const SegmentationConfig& config = {});

// Rebuilds segments and boundary divergences from a boundary list.
Segmentation describe_segmentation(std::span<const double> x,
                                   std::span<const std::size_t> boundaries,
                                   const std::vector<bool>& refined,
                                   const SegmentationConfig& config);

}  // namespace regime_graph
