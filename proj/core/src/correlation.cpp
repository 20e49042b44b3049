#include "regime_graph/correlation.hpp"

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

std::size_t CorrelationMatrix::index_of(const std::string& sector) const {
  auto it = std::find(sectors.begin(), sectors.end(), sector);
  if (it == sectors.end()) {
    throw DomainError(ErrorCode::InvalidArgument, "sector " + sector + " not in matrix");
  }
  return static_cast<std::size_t>(it - sectors.begin());
}

void validate_matrix(const CorrelationMatrix& c) {
  const std::size_t n = c.size();
  if (c.values.size() != n * n) {
    throw DomainError(ErrorCode::InvalidArgument, "matrix storage does not match sector count");
  }
  std::set<std::string> unique(c.sectors.begin(), c.sectors.end());
  if (unique.size() != n) throw DomainError(ErrorCode::InvalidArgument, "duplicate sector ids");
  for (std::size_t i = 0; i < n; ++i) {
    if (c(i, i) != 1.0) {
      throw DomainError(ErrorCode::InvalidArgument, "diagonal entry of " + c.sectors[i] + " is not 1");
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      double v = c(i, j);
      if (!std::isfinite(v) || v < -1.0 || v > 1.0) {
        throw DomainError(ErrorCode::OutOfRange, "correlation " + c.sectors[i] + "-" +
                                                     c.sectors[j] + " outside [-1, 1]");
      }
      if (v != c(j, i)) {
        throw DomainError(ErrorCode::InvalidArgument, "matrix is not symmetric at " +
                                                          c.sectors[i] + "-" + c.sectors[j]);
      }
    }
  }
}

std::vector<Timestamp> common_timestamps(std::span<const ReturnSeries> series,
                                         const Interval& interval, OvernightMode overnight) {
  if (series.empty()) return {};
  std::vector<Timestamp> out;
  const auto& first = series.front();
  for (std::size_t t = 0; t < first.size(); ++t) {
    Timestamp ts = first.timestamps[t];
    if (!interval.contains(ts)) continue;
    if (overnight == OvernightMode::Drop && first.overnight[t]) continue;
    bool everywhere = true;
    for (std::size_t s = 1; s < series.size() && everywhere; ++s) {
      const auto& other = series[s];
      auto it = std::lower_bound(other.timestamps.begin(), other.timestamps.end(), ts);
      if (it == other.timestamps.end() || *it != ts) {
        everywhere = false;
      } else if (overnight == OvernightMode::Drop &&
                 other.overnight[static_cast<std::size_t>(it - other.timestamps.begin())]) {
        everywhere = false;
      }
    }
    if (everywhere) out.push_back(ts);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

CorrelationMatrix cross_correlation(std::span<const ReturnSeries> series,
                                    const Interval& interval, OvernightMode overnight) {
  const std::size_t n = series.size();
  if (n == 0) throw DomainError(ErrorCode::EmptyInput, "no series to correlate");
  auto common = common_timestamps(series, interval, overnight);
  if (common.size() < 2) {
    throw DomainError(ErrorCode::InsufficientOverlap,
                      "only " + std::to_string(common.size()) +
                          " common timestamps inside the interval");
  }
  const std::size_t T = common.size();
  std::vector<std::vector<double>> centred(n, std::vector<double>(T));
  std::vector<double> sumsq(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    const auto& ser = series[s];
    double mean = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      auto it = std::lower_bound(ser.timestamps.begin(), ser.timestamps.end(), common[t]);
      centred[s][t] = ser.returns[static_cast<std::size_t>(it - ser.timestamps.begin())];
      mean += centred[s][t];
    }
    mean /= static_cast<double>(T);
    for (auto& v : centred[s]) {
      v -= mean;
      sumsq[s] += v * v;
    }
    if (!(sumsq[s] > 0.0)) {
      throw DomainError(ErrorCode::ZeroVarianceSeries,
                        ser.sector + " is flat over the interval");
    }
  }

  CorrelationMatrix c;
  for (const auto& s : series) c.sectors.push_back(s.sector);
  c.values.assign(n * n, 0.0);
  c.interval = {common.front(), common.back()};
  c.sample_count = T;
  c.overnight_included = overnight == OvernightMode::Keep;
  for (std::size_t i = 0; i < n; ++i) {
    c(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      double sxy = 0.0;
      for (std::size_t t = 0; t < T; ++t) sxy += centred[i][t] * centred[j][t];
      double r = sxy / std::sqrt(sumsq[i] * sumsq[j]);
      r = std::clamp(r, -1.0, 1.0);
      c(i, j) = c(j, i) = r;
    }
  }
  return c;
}

CorrelationMatrix cross_correlation(std::span<const ReturnSeries> series,
                                    OvernightMode overnight) {
  return cross_correlation(series,
                           {std::numeric_limits<Timestamp>::min(),
                            std::numeric_limits<Timestamp>::max()},
                           overnight);
}

IntervalSelection select_interval(const std::map<std::string, PhaseAssignment>& assignments,
                                  const CorrespondingSegment& target,
                                  std::size_t min_sector_coverage) {
  std::set<Timestamp> points;
  for (const auto& [sector, w] : target.windows) {
    points.insert(w.start_ts);
    points.insert(w.end_ts);
  }
  std::vector<Timestamp> pts(points.begin(), points.end());

  IntervalSelection best;
  std::size_t best_count = 0;
  long double best_score = -1.0L;
  for (std::size_t a = 0; a < pts.size(); ++a) {
    for (std::size_t b = a; b < pts.size(); ++b) {
      Interval iv{pts[a], pts[b]};
      std::size_t count = 0;
      for (const auto& [sector, w] : target.windows) {
        if (w.phase == target.dominant_phase && w.start_ts <= iv.start && iv.end <= w.end_ts) {
          ++count;
        }
      }
      long double score =
          static_cast<long double>(count) * static_cast<long double>(iv.end - iv.start);
      bool better = score > best_score ||
                    (score == best_score && count > best_count);
      if (better) {
        best_score = score;
        best_count = count;
        best.interval = iv;
      }
    }
  }
  if (best_count < min_sector_coverage || best_count == 0) {
    throw DomainError(ErrorCode::NoFeasibleInterval,
                      "best interval covers " + std::to_string(best_count) + " sectors, need " +
                          std::to_string(min_sector_coverage));
  }

  std::set<std::string> sectors;
  for (const auto& [sector, a] : assignments) sectors.insert(sector);
  for (const auto& [sector, w] : target.windows) sectors.insert(sector);
  const auto& iv = best.interval;
  for (const auto& sector : sectors) {
    auto w = target.windows.find(sector);
    if (w != target.windows.end() && w->second.phase == target.dominant_phase &&
        w->second.start_ts <= iv.start && iv.end <= w->second.end_ts) {
      best.covered.push_back(sector);
      continue;
    }
    IntervalException ex{sector, {}};
    auto a = assignments.find(sector);
    if (a != assignments.end()) {
      for (const auto& s : a->second.segments) {
        if (s.start_ts <= iv.end && s.end_ts >= iv.start &&
            (ex.covering_phases.empty() || ex.covering_phases.back() != s.phase)) {
          ex.covering_phases.push_back(s.phase);
        }
      }
    } else if (w != target.windows.end() && w->second.start_ts <= iv.end &&
               w->second.end_ts >= iv.start) {
      ex.covering_phases.push_back(w->second.phase);
    }
    best.exceptions.push_back(std::move(ex));
  }
  return best;
}

SectorAverages sector_averages(const CorrelationMatrix& c) {
  const std::size_t n = c.size();
  SectorAverages out;
  out.sectors = c.sectors;
  out.per_sector.assign(n, 0.0);
  double upper = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      row += c(i, j);
      if (j > i) upper += c(i, j);
    }
    out.per_sector[i] = n > 1 ? row / static_cast<double>(n - 1) : 0.0;
  }
  out.market = n > 1 ? upper / static_cast<double>(n * (n - 1) / 2) : 0.0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (out.per_sector[a] != out.per_sector[b]) return out.per_sector[a] > out.per_sector[b];
    return c.sectors[a] < c.sectors[b];
  });
  out.ranks.assign(n, 0);
  for (std::size_t r = 0; r < n; ++r) out.ranks[order[r]] = static_cast<int>(r) + 1;
  return out;
}

namespace {

ProbeComparison compare(const CorrelationMatrix& base, const CorrelationMatrix& probe) {
  ProbeComparison out;
  out.interval = probe.interval;
  out.sample_count = probe.sample_count;
  out.max_positive.value = -std::numeric_limits<double>::infinity();
  out.max_negative.value = std::numeric_limits<double>::infinity();
  const std::size_t n = base.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      PairDifference d{base.sectors[i], base.sectors[j], probe(i, j) - base(i, j)};
      if (d.value > out.max_positive.value) out.max_positive = d;
      if (d.value < out.max_negative.value) out.max_negative = d;
      out.differences.push_back(std::move(d));
    }
  }
  if (out.differences.empty()) {
    out.max_positive.value = 0.0;
    out.max_negative.value = 0.0;
  }
  return out;
}

}  // namespace

RobustnessReport robustness_probe(std::span<const ReturnSeries> series,
                                  const Interval& interval, int shrink, int grow,
                                  const Session& session, OvernightMode overnight) {
  if (shrink < 0 || grow < 0) {
    throw DomainError(ErrorCode::InvalidArgument, "probe margins must be non-negative");
  }
  RobustnessReport report;
  report.base = cross_correlation(series, interval, overnight);

  auto all = common_timestamps(series,
                               {std::numeric_limits<Timestamp>::min(),
                                std::numeric_limits<Timestamp>::max()},
                               overnight);
  // Trading days in grid order, with the first and last sample of each.
  std::vector<std::int64_t> days;
  std::vector<Timestamp> first, last;
  for (auto ts : all) {
    auto d = session.day_of(ts);
    if (days.empty() || days.back() != d) {
      days.push_back(d);
      first.push_back(ts);
      last.push_back(ts);
    } else {
      last.back() = ts;
    }
  }
  auto day_index = [&](Timestamp ts) {
    auto it = std::lower_bound(days.begin(), days.end(), session.day_of(ts));
    return static_cast<std::ptrdiff_t>(it - days.begin());
  };
  const auto i0 = day_index(report.base.interval.start);
  const auto i1 = day_index(report.base.interval.end);
  const auto last_day = static_cast<std::ptrdiff_t>(days.size()) - 1;

  Interval shorter = report.base.interval;
  if (shrink > 0) {
    auto a = i0 + shrink;
    auto b = i1 - shrink;
    if (a > last_day || b < 0 || a > b) {
      throw DomainError(ErrorCode::InsufficientOverlap,
                        "interval too short to shrink by " + std::to_string(shrink) + " days");
    }
    shorter = {first[static_cast<std::size_t>(a)], last[static_cast<std::size_t>(b)]};
  }
  Interval longer = report.base.interval;
  if (grow > 0) {
    auto a = std::max<std::ptrdiff_t>(0, i0 - grow);
    auto b = std::min(last_day, i1 + grow);
    longer = {first[static_cast<std::size_t>(a)], last[static_cast<std::size_t>(b)]};
  }
  report.shorter = cross_correlation(series, shorter, overnight);
  report.longer = cross_correlation(series, longer, overnight);
  report.shrunk = compare(report.base, report.shorter);
  report.grown = compare(report.base, report.longer);
  return report;
}

void write_matrix_csv(std::ostream& out, const CorrelationMatrix& c) {
  out << "# start_ts=" << c.interval.start << '\n';
  out << "# end_ts=" << c.interval.end << '\n';
  out << "# sample_count=" << c.sample_count << '\n';
  out << "# overnight_included=" << (c.overnight_included ? 1 : 0) << '\n';
  out << "sector";
  for (const auto& s : c.sectors) out << ',' << s;
  out << '\n';
  for (std::size_t i = 0; i < c.size(); ++i) {
    out << c.sectors[i];
    for (std::size_t j = 0; j < c.size(); ++j) out << ',' << detail::format_double(c(i, j));
    out << '\n';
  }
}

CorrelationMatrix parse_matrix_csv(std::istream& in) {
  CorrelationMatrix c;
  std::string line;
  bool header = false;
  std::size_t row = 0;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto t = detail::trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      auto body = detail::trim(t.substr(1));
      auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      auto key = detail::trim(body.substr(0, eq));
      auto value = std::string(detail::trim(body.substr(eq + 1)));
      if (key == "start_ts") c.interval.start = parse_timestamp(value);
      if (key == "end_ts") c.interval.end = parse_timestamp(value);
      if (key == "sample_count") c.sample_count = std::stoul(value);
      if (key == "overnight_included") c.overnight_included = value != "0";
      continue;
    }
    auto f = detail::split_csv(t);
    if (!header) {
      c.sectors.assign(f.begin() + 1, f.end());
      c.values.assign(c.sectors.size() * c.sectors.size(), 0.0);
      header = true;
      continue;
    }
    const std::size_t n = c.sectors.size();
    if (f.size() != n + 1 || row >= n) {
      throw DomainError(ErrorCode::ParseError,
                        "line " + std::to_string(line_no) + ": matrix row has wrong width");
    }
    if (f[0] != c.sectors[row]) {
      throw DomainError(ErrorCode::ParseError, "line " + std::to_string(line_no) +
                                                   ": row label " + f[0] + " should be " +
                                                   c.sectors[row]);
    }
    for (std::size_t j = 0; j < n; ++j) {
      const auto& cell = f[j + 1];
      if ((cell.empty() || cell == "-") && j == row) {
        c(row, j) = 1.0;
      } else {
        c(row, j) = detail::parse_double(cell, line_no);
      }
    }
    ++row;
  }
  if (!header || row != c.sectors.size()) {
    throw DomainError(ErrorCode::ParseError, "matrix CSV is incomplete");
  }
  validate_matrix(c);
  return c;
}

}  // namespace regime_graph
