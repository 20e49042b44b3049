#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "regime_graph/market_data.hpp"
#include "regime_graph/phase_clustering.hpp"

namespace regime_graph {

struct Interval {
  Timestamp start = 0;  // inclusive
  Timestamp end = 0;    // inclusive

  bool contains(Timestamp t) const { return start <= t && t <= end; }
  bool operator==(const Interval&) const = default;
};

struct CorrelationMatrix {
  std::vector<std::string> sectors;
  std::vector<double> values;  // row-major n x n
  Interval interval;
  std::size_t sample_count = 0;
  bool overnight_included = true;

  std::size_t size() const { return sectors.size(); }
  double operator()(std::size_t i, std::size_t j) const { return values[i * size() + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values[i * size() + j]; }
  std::size_t index_of(const std::string& sector) const;
  bool operator==(const CorrelationMatrix&) const = default;
};

// Symmetric, unit diagonal, entries within [-1, 1]; throws InvalidArgument.
void validate_matrix(const CorrelationMatrix& c);

// Sorted timestamps present in every series and inside the interval.
std::vector<Timestamp> common_timestamps(std::span<const ReturnSeries> series,
                                         const Interval& interval,
                                         OvernightMode overnight = OvernightMode::Keep);

// Zero-lag Pearson correlation over the timestamps shared by all series.
CorrelationMatrix cross_correlation(std::span<const ReturnSeries> series,
                                    const Interval& interval,
                                    OvernightMode overnight = OvernightMode::Keep);

// Whole-period matrix.
CorrelationMatrix cross_correlation(std::span<const ReturnSeries> series,
                                    OvernightMode overnight = OvernightMode::Keep);

struct IntervalException {
  std::string sector;
  std::vector<Phase> covering_phases;

  bool operator==(const IntervalException&) const = default;
};

struct IntervalSelection {
  Interval interval;
  std::vector<std::string> covered;
  std::vector<IntervalException> exceptions;

  bool operator==(const IntervalSelection&) const = default;
};

// Picks the interval that maximises (sectors strictly inside a window of the
// dominant phase) x (interval length); ties prefer more sectors, then the
// earliest interval. Candidate endpoints are the window start and
// end times. Sectors not strictly inside are reported with the phases that
// cover the interval in their assignment.
IntervalSelection select_interval(const std::map<std::string, PhaseAssignment>& assignments,
                                  const CorrespondingSegment& target,
                                  std::size_t min_sector_coverage = 6);

struct SectorAverages {
  std::vector<std::string> sectors;
  std::vector<double> per_sector;  // mean of off-diagonal row entries
  double market = 0.0;             // mean of the upper triangle
  std::vector<int> ranks;          // 1 = highest per-sector mean

  bool operator==(const SectorAverages&) const = default;
};

SectorAverages sector_averages(const CorrelationMatrix& c);

struct PairDifference {
  std::string a;
  std::string b;
  double value = 0.0;

  bool operator==(const PairDifference&) const = default;
};

struct ProbeComparison {
  Interval interval;
  std::size_t sample_count = 0;
  std::vector<PairDifference> differences;  // probe minus base, upper triangle
  PairDifference max_positive;
  PairDifference max_negative;
};

struct RobustnessReport {
  CorrelationMatrix base;
  CorrelationMatrix shorter;
  CorrelationMatrix longer;
  ProbeComparison shrunk;
  ProbeComparison grown;
};

// Recomputes the matrix with the interval moved inwards by `shrink` and
// outwards by `grow` trading days at both ends.
RobustnessReport robustness_probe(std::span<const ReturnSeries> series,
                                  const Interval& interval, int shrink, int grow,
                                  const Session& session = {},
                                  OvernightMode overnight = OvernightMode::Keep);

// Square headered CSV; interval metadata goes in leading `#` comment lines.
void write_matrix_csv(std::ostream& out, const CorrelationMatrix& c);
CorrelationMatrix parse_matrix_csv(std::istream& in);

}  // namespace regime_graph
