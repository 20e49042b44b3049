#include "regime_graph/synthetic.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include "regime_graph/error.hpp"

namespace regime_graph {

namespace {

std::mt19937_64 stream(std::uint64_t seed, std::uint32_t lane) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    lane};
  return std::mt19937_64(seq);
}

bool is_weekday(std::int64_t day) {
  auto w = ((day + 4) % 7 + 7) % 7;  // 0 = Sunday
  return w != 0 && w != 6;
}

}  // namespace

const std::vector<std::string>& sector_symbols() {
  static const std::vector<std::string> symbols = {"BM", "CY", "EN", "FN", "HC",
                                                   "IN", "NC", "TC", "TL", "UT"};
  return symbols;
}

double normalized_loading(double raw) { return raw / std::sqrt(1.0 + raw * raw); }

std::vector<Timestamp> trading_grid(std::size_t count, int interval_seconds,
                                    const Session& session, std::int64_t first_day) {
  std::vector<Timestamp> out;
  out.reserve(count);
  for (auto day = first_day; out.size() < count; ++day) {
    if (!is_weekday(day)) continue;
    for (int s = session.start_seconds; s <= session.end_seconds && out.size() < count;
         s += interval_seconds) {
      out.push_back(session.at(day, s));
    }
  }
  return out;
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  if (spec.sectors.empty()) throw DomainError(ErrorCode::EmptyInput, "no sectors");
  std::size_t total = 0;
  for (std::size_t s = 0; s < spec.sectors.size(); ++s) {
    const auto& sec = spec.sectors[s];
    std::size_t len = 0;
    for (const auto& r : sec.regimes) {
      if (r.length < 2 * spec.min_seg_len) {
        throw DomainError(ErrorCode::InvalidArgument, sec.sector + ": regime shorter than 2 x min_seg_len");
      }
      if (!(r.sigma > 0)) throw DomainError(ErrorCode::InvalidArgument, sec.sector + ": sigma must be > 0");
      if (r.loadings.size() > spec.factor_count) {
        throw DomainError(ErrorCode::InvalidLoadings, sec.sector + ": more loadings than factors");
      }
      double sum_sq = 0;
      for (double b : r.loadings) sum_sq += b * b;
      if (sum_sq > 1.0) {
        throw DomainError(ErrorCode::InvalidLoadings, sec.sector + ": squared loadings exceed 1");
      }
      len += r.length;
    }
    if (len == 0) throw DomainError(ErrorCode::EmptyInput, sec.sector + ": no regimes");
    if (s == 0) total = len;
    if (len != total) {
      throw DomainError(ErrorCode::InvalidArgument, "sectors differ in total length");
    }
  }

  auto grid = trading_grid(total + 1, spec.interval_seconds, spec.session, spec.first_day);

  std::vector<std::vector<double>> factors(spec.factor_count, std::vector<double>(total));
  {
    auto rng = stream(spec.seed, 0);
    std::normal_distribution<double> normal;
    for (std::size_t t = 0; t < total; ++t) {
      for (auto& f : factors) f[t] = normal(rng);
    }
  }

  SyntheticData data;
  data.first_bar = grid.front();
  for (std::size_t s = 0; s < spec.sectors.size(); ++s) {
    const auto& sec = spec.sectors[s];
    auto rng = stream(spec.seed, static_cast<std::uint32_t>(s + 1));
    std::normal_distribution<double> normal;

    ReturnSeries rs;
    rs.sector = sec.sector;
    rs.returns.reserve(total);
    TruthSector truth{sec.sector, {}, sec.regimes};
    std::size_t t = 0;
    for (const auto& r : sec.regimes) {
      if (t > 0) truth.boundaries.push_back(t);
      double sum_sq = 0;
      for (double b : r.loadings) sum_sq += b * b;
      const double idio = std::sqrt(1.0 - sum_sq);
      for (std::size_t i = 0; i < r.length; ++i, ++t) {
        double z = idio * normal(rng);
        for (std::size_t k = 0; k < r.loadings.size(); ++k) z += r.loadings[k] * factors[k][t];
        rs.returns.push_back(r.sigma * z + r.mean);
      }
    }
    for (std::size_t i = 1; i <= total; ++i) {
      rs.timestamps.push_back(grid[i]);
      rs.overnight.push_back(spec.session.day_of(grid[i]) != spec.session.day_of(grid[i - 1]));
    }
    data.series.push_back(std::move(rs));
    data.truth.push_back(std::move(truth));
  }
  return data;
}

std::vector<PriceObservation> synthetic_prices(const SyntheticData& data, double start_price) {
  std::vector<PriceObservation> out;
  for (const auto& s : data.series) {
    double log_p = std::log(start_price);
    out.push_back({s.sector, data.first_bar, start_price});
    for (std::size_t i = 0; i < s.size(); ++i) {
      log_p += s.returns[i];
      out.push_back({s.sector, s.timestamps[i], std::exp(log_p)});
    }
  }
  return out;
}

SyntheticSpec default_scenario(std::size_t sectors, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.seed = seed;
  spec.factor_count = 1;
  for (std::size_t s = 0; s < sectors; ++s) {
    std::string name = s < sector_symbols().size() ? sector_symbols()[s]
                                                   : "S" + std::to_string(s + 1);
    // the turbulent stretch starts up to four trading days apart
    std::size_t stagger = 13 * (s % 5);
    SyntheticSector sec{name,
                        {{390 + stagger, 0.0016, 0.0, {0.5}, Phase::Low},
                         {260, 0.0037, 0.0, {0.6}, Phase::Moderate},
                         {195, 0.0069, 0.0, {0.8}, Phase::VeryHigh},
                         {130, 0.0146, 0.0, {0.9}, Phase::ExtremelyHigh},
                         {325 - stagger, 0.0037, 0.0, {0.6}, Phase::Moderate}}};
    spec.sectors.push_back(std::move(sec));
  }
  return spec;
}

SyntheticSpec hub_scenario(std::size_t sectors, std::size_t length, double hub_raw,
                           double other_raw, std::uint64_t seed, std::size_t hub) {
  SyntheticSpec spec;
  spec.seed = seed;
  spec.factor_count = 1;
  for (std::size_t s = 0; s < sectors; ++s) {
    std::string name = s < sector_symbols().size() ? sector_symbols()[s]
                                                   : "S" + std::to_string(s + 1);
    double b = normalized_loading(s == hub ? hub_raw : other_raw);
    spec.sectors.push_back({name, {{length, 0.001, 0.0, {b}, std::nullopt}}});
  }
  return spec;
}

}  // namespace regime_graph
