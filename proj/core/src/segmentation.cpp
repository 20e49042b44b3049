#include "regime_graph/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <set>
#include <utility>

#include "regime_graph/error.hpp"

namespace regime_graph {

namespace {

// Prefix sums of the mean-centred window. Centring keeps the variance
// differences well conditioned; long double absorbs the remaining
// cancellation for windows of a few hundred thousand samples.
class PrefixMoments {
 public:
  explicit PrefixMoments(std::span<const double> x) : s1_(x.size() + 1), s2_(x.size() + 1) {
    long double mean = 0.0L;
    for (double v : x) mean += v;
    if (!x.empty()) mean /= static_cast<long double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      long double d = static_cast<long double>(x[i]) - mean;
      s1_[i + 1] = s1_[i] + d;
      s2_[i + 1] = s2_[i] + d * d;
    }
  }

  // ML variance of samples [a, b).
  long double variance(std::size_t a, std::size_t b) const {
    auto n = static_cast<long double>(b - a);
    long double m = (s1_[b] - s1_[a]) / n;
    long double v = (s2_[b] - s2_[a]) / n - m * m;
    return v < 0.0L ? 0.0L : v;
  }

 private:
  std::vector<long double> s1_;
  std::vector<long double> s2_;
};

constexpr long double kMinVariance =
    static_cast<long double>(kMinSigma) * static_cast<long double>(kMinSigma);

// Returns n ln s with s clamped; sets *clamped when the clamp was needed.
long double weighted_log_sigma(long double variance, std::size_t n, bool* clamped) {
  if (variance < kMinVariance) {
    variance = kMinVariance;
    *clamped = true;
  }
  return 0.5L * static_cast<long double>(n) * std::log(variance);
}

double split_divergence(const PrefixMoments& pm, std::size_t lo, std::size_t t,
                        std::size_t hi, bool* clamped) {
  const std::size_t n = hi - lo;
  long double whole = weighted_log_sigma(pm.variance(lo, hi), n, clamped);
  long double left = weighted_log_sigma(pm.variance(lo, lo + t), t, clamped);
  long double right = weighted_log_sigma(pm.variance(lo + t, hi), n - t, clamped);
  return static_cast<double>(whole - left - right + 0.5L);
}

void check_window(std::size_t n, std::size_t min_seg_len) {
  if (min_seg_len < 2) {
    throw DomainError(ErrorCode::InvalidArgument, "min_seg_len must be at least 2");
  }
  if (n < 2 * min_seg_len) {
    throw DomainError(ErrorCode::WindowTooShort,
                      "window of " + std::to_string(n) + " samples is shorter than 2*" +
                          std::to_string(min_seg_len));
  }
}

Split best_split_in(const PrefixMoments& pm, std::size_t lo, std::size_t hi,
                    std::size_t min_seg_len) {
  Split best{0, -std::numeric_limits<double>::infinity(), false};
  for (std::size_t t = min_seg_len; t + min_seg_len <= hi - lo; ++t) {
    bool clamped = false;
    double d = split_divergence(pm, lo, t, hi, &clamped);
    best.clamped = best.clamped || clamped;
    if (d > best.divergence) {
      best.t = t;
      best.divergence = d;
    }
  }
  return best;
}

struct OptimizeResult {
  bool converged = false;
  int sweeps = 0;
  bool clamped = false;
};

OptimizeResult optimize_in_place(const PrefixMoments& pm, std::size_t n,
                                 std::vector<std::size_t>& bounds, std::size_t min_seg_len,
                                 int max_sweeps) {
  OptimizeResult result;
  while (result.sweeps < max_sweeps) {
    ++result.sweeps;
    bool moved = false;
    for (std::size_t m = 0; m < bounds.size(); ++m) {
      std::size_t lo = m == 0 ? 0 : bounds[m - 1];
      std::size_t hi = m + 1 == bounds.size() ? n : bounds[m + 1];
      Split s = best_split_in(pm, lo, hi, min_seg_len);
      result.clamped = result.clamped || s.clamped;
      if (lo + s.t != bounds[m]) {
        bounds[m] = lo + s.t;
        moved = true;
      }
    }
    if (!moved) {
      result.converged = true;
      break;
    }
  }
  return result;
}

double local_divergence(const PrefixMoments& pm, std::size_t n,
                        const std::vector<std::size_t>& bounds, std::size_t m,
                        bool* clamped) {
  std::size_t lo = m == 0 ? 0 : bounds[m - 1];
  std::size_t hi = m + 1 == bounds.size() ? n : bounds[m + 1];
  return split_divergence(pm, lo, bounds[m] - lo, hi, clamped);
}

void validate_boundaries(std::size_t n, std::span<const std::size_t> bounds,
                         std::size_t min_seg_len) {
  std::size_t prev = 0;
  for (auto b : bounds) {
    if (b < prev + min_seg_len) {
      throw DomainError(ErrorCode::InvalidArgument,
                        "boundary " + std::to_string(b) + " leaves a segment shorter than " +
                            std::to_string(min_seg_len));
    }
    prev = b;
  }
  if (n < prev + min_seg_len) {
    throw DomainError(ErrorCode::InvalidArgument,
                      "last segment shorter than " + std::to_string(min_seg_len));
  }
}

struct CoreResult {
  std::vector<std::size_t> bounds;
  bool converged = true;
  bool clamped = false;
};

// Binary recursive splitting with boundary optimization after every accepted
// split. A segment is retried whenever its extent changes.
CoreResult segment_core(const PrefixMoments& pm, std::size_t n, double cutoff,
                        std::size_t min_seg_len, int max_sweeps) {
  CoreResult out;
  std::set<std::pair<std::size_t, std::size_t>> exhausted;
  while (true) {
    bool accepted = false;
    std::size_t lo = 0;
    for (std::size_t m = 0; m <= out.bounds.size() && !accepted; ++m) {
      std::size_t hi = m == out.bounds.size() ? n : out.bounds[m];
      auto key = std::make_pair(lo, hi);
      if (hi - lo >= 2 * min_seg_len && !exhausted.contains(key)) {
        Split s = best_split_in(pm, lo, hi, min_seg_len);
        out.clamped = out.clamped || s.clamped;
        if (s.divergence >= cutoff) {
          auto trial = out.bounds;
          trial.insert(trial.begin() + static_cast<std::ptrdiff_t>(m), lo + s.t);
          auto opt = optimize_in_place(pm, n, trial, min_seg_len, max_sweeps);
          out.clamped = out.clamped || opt.clamped;
          bool clamped = false;
          double post = local_divergence(pm, n, trial, m, &clamped);
          if (post >= cutoff) {
            out.bounds = std::move(trial);
            out.converged = opt.converged;
            accepted = true;
          }
        }
        if (!accepted) exhausted.insert(key);
      }
      lo = hi;
    }
    if (!accepted) break;
  }
  return out;
}

class Refiner {
 public:
  Refiner(std::span<const double> x, const SegmentationConfig& config)
      : x_(x), pm_(x), config_(config) {}

  void refine(std::size_t lo, std::size_t hi) {
    const std::size_t len = hi - lo;
    if (len < 2 * config_.min_seg_len) return;
    Split direct = best_split_in(pm_, lo, hi, config_.min_seg_len);
    clamped_ = clamped_ || direct.clamped;
    if (direct.divergence >= config_.cutoff) {
      accept(lo, lo + direct.t, hi);
      return;
    }
    if (!config_.refine || len <= config_.long_segment_len) return;

    auto sub = x_.subspan(lo, len);
    PrefixMoments local(sub);
    double level = config_.cutoff;
    while (level > config_.refine_floor) {
      level = std::max(level * config_.refine_factor, config_.refine_floor);
      auto core = segment_core(local, len, level, config_.min_seg_len, config_.max_sweeps);
      clamped_ = clamped_ || core.clamped;
      std::size_t best = core.bounds.size();
      double best_div = config_.cutoff;
      for (std::size_t m = 0; m < core.bounds.size(); ++m) {
        bool clamped = false;
        double d = local_divergence(local, len, core.bounds, m, &clamped);
        if (d > best_div) {
          best_div = d;
          best = m;
        }
      }
      if (best < core.bounds.size()) {
        accept(lo, lo + core.bounds[best], hi);
        return;
      }
    }
  }

  const std::vector<std::size_t>& added() const { return added_; }
  bool clamped() const { return clamped_; }

 private:
  void accept(std::size_t lo, std::size_t b, std::size_t hi) {
    added_.push_back(b);
    refine(lo, b);
    refine(b, hi);
  }

  std::span<const double> x_;
  PrefixMoments pm_;
  SegmentationConfig config_;
  std::vector<std::size_t> added_;
  bool clamped_ = false;
};

}  // namespace

GaussianParams fit_gaussian(std::span<const double> x) {
  GaussianParams p;
  p.count = x.size();
  if (x.empty()) return p;
  long double sum = 0.0L;
  for (double v : x) sum += v;
  long double mean = sum / static_cast<long double>(x.size());
  long double ss = 0.0L;
  for (double v : x) ss += (v - mean) * (v - mean);
  p.mean = static_cast<double>(mean);
  p.std = static_cast<double>(std::sqrt(ss / static_cast<long double>(x.size())));
  return p;
}

std::vector<SpectrumPoint> divergence_spectrum(std::span<const double> x,
                                               std::size_t min_seg_len) {
  check_window(x.size(), min_seg_len);
  PrefixMoments pm(x);
  std::vector<SpectrumPoint> out;
  out.reserve(x.size() - 2 * min_seg_len + 1);
  for (std::size_t t = min_seg_len; t + min_seg_len <= x.size(); ++t) {
    bool clamped = false;
    double d = split_divergence(pm, 0, t, x.size(), &clamped);
    out.push_back({t, d, clamped});
  }
  return out;
}

double divergence_at(std::span<const double> x, std::size_t t) {
  if (t == 0 || t >= x.size()) {
    throw DomainError(ErrorCode::InvalidArgument, "split must leave both parts non-empty");
  }
  PrefixMoments pm(x);
  bool clamped = false;
  return split_divergence(pm, 0, t, x.size(), &clamped);
}

Split best_split(std::span<const double> x, std::size_t min_seg_len) {
  check_window(x.size(), min_seg_len);
  PrefixMoments pm(x);
  return best_split_in(pm, 0, x.size(), min_seg_len);
}

BoundaryOptimization optimize_boundaries(std::span<const double> x,
                                         std::vector<std::size_t> boundaries,
                                         std::size_t min_seg_len, int max_sweeps) {
  if (min_seg_len < 2) {
    throw DomainError(ErrorCode::InvalidArgument, "min_seg_len must be at least 2");
  }
  validate_boundaries(x.size(), boundaries, min_seg_len);
  PrefixMoments pm(x);
  auto r = optimize_in_place(pm, x.size(), boundaries, min_seg_len, max_sweeps);
  return {std::move(boundaries), r.converged, r.sweeps};
}

std::uint64_t hash_series(std::span<const double> x) {
  // FNV-1a over the IEEE-754 bit patterns.
  std::uint64_t h = 1469598103934665603ULL;
  for (double v : x) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof bits);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffU;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

Segmentation describe_segmentation(std::span<const double> x,
                                   std::span<const std::size_t> boundaries,
                                   const std::vector<bool>& refined,
                                   const SegmentationConfig& config) {
  validate_boundaries(x.size(), boundaries, 1);
  PrefixMoments pm(x);
  std::vector<std::size_t> bounds(boundaries.begin(), boundaries.end());
  Segmentation seg;
  seg.data_hash = hash_series(x);
  seg.n = x.size();
  seg.min_seg_len = config.min_seg_len;
  seg.cutoff = config.cutoff;
  for (std::size_t m = 0; m < bounds.size(); ++m) {
    Boundary b;
    b.index = bounds[m];
    b.divergence = local_divergence(pm, x.size(), bounds, m, &seg.clamped);
    b.refined = m < refined.size() && refined[m];
    seg.boundaries.push_back(b);
  }
  std::size_t lo = 0;
  for (std::size_t m = 0; m <= bounds.size(); ++m) {
    std::size_t hi = m == bounds.size() ? x.size() : bounds[m];
    Segment s;
    s.start = lo;
    s.end = hi - 1;
    s.params = fit_gaussian(x.subspan(lo, hi - lo));
    if (s.params.std < kMinSigma) seg.clamped = true;
    seg.segments.push_back(s);
    lo = hi;
  }
  return seg;
}

Segmentation recursive_segment(std::span<const double> x, const SegmentationConfig& config) {
  if (config.min_seg_len < 2) {
    throw DomainError(ErrorCode::InvalidArgument, "min_seg_len must be at least 2");
  }
  if (x.size() < 2 * config.min_seg_len) {
    throw DomainError(ErrorCode::SeriesTooShort,
                      "series of " + std::to_string(x.size()) +
                          " samples cannot hold two segments of " +
                          std::to_string(config.min_seg_len));
  }
  for (double v : x) {
    if (!std::isfinite(v)) {
      throw DomainError(ErrorCode::InvalidArgument, "series contains a non-finite value");
    }
  }
  PrefixMoments pm(x);
  auto core = segment_core(pm, x.size(), config.cutoff, config.min_seg_len, config.max_sweeps);

  // Refinement keeps the optimized boundaries fixed and only adds new ones
  // inside the segments they delimit.
  Refiner refiner(x, config);
  std::size_t lo = 0;
  for (std::size_t m = 0; m <= core.bounds.size(); ++m) {
    std::size_t hi = m == core.bounds.size() ? x.size() : core.bounds[m];
    refiner.refine(lo, hi);
    lo = hi;
  }

  std::vector<std::pair<std::size_t, bool>> all;
  for (auto b : core.bounds) all.emplace_back(b, false);
  for (auto b : refiner.added()) all.emplace_back(b, true);
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> bounds;
  std::vector<bool> flags;
  for (auto [b, r] : all) {
    bounds.push_back(b);
    flags.push_back(r);
  }
  auto seg = describe_segmentation(x, bounds, flags, config);
  seg.converged = core.converged;
  seg.clamped = seg.clamped || core.clamped || refiner.clamped();
  return seg;
}

Segmentation segment_series(const ReturnSeries& series, const SegmentationConfig& config) {
  auto seg = recursive_segment(series.returns, config);
  seg.sector = series.sector;
  if (series.timestamps.size() == series.returns.size() && !series.timestamps.empty()) {
    for (auto& b : seg.boundaries) b.timestamp = series.timestamps[b.index];
    for (auto& s : seg.segments) {
      s.start_ts = series.timestamps[s.start];
      s.end_ts = series.timestamps[s.end];
    }
  }
  return seg;
}

}  // namespace regime_graph
