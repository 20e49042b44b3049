#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "regime_graph/market_data.hpp"
#include "regime_graph/phase_clustering.hpp"

namespace regime_graph {

// One stationary stretch of a synthetic sector. Returns are
//   sigma * (sqrt(1 - sum b^2) * eps + sum_k b_k f_k) + mean
// with f_k standard normal factors shared by all sectors at the same time.
struct Regime {
  std::size_t length = 0;
  double sigma = 0.0;
  double mean = 0.0;
  std::vector<double> loadings;
  std::optional<Phase> phase;  // ground-truth label, informational only

  bool operator==(const Regime&) const = default;
};

struct SyntheticSector {
  std::string sector;
  std::vector<Regime> regimes;

  bool operator==(const SyntheticSector&) const = default;
};

struct SyntheticSpec {
  std::vector<SyntheticSector> sectors;
  std::size_t factor_count = 1;
  std::uint64_t seed = 7;
  std::size_t min_seg_len = 13;
  int interval_seconds = 1800;
  Session session;
  std::int64_t first_day = 13515;  // 2007-01-02, days since the epoch

  bool operator==(const SyntheticSpec&) const = default;
};

struct TruthSector {
  std::string sector;
  std::vector<std::size_t> boundaries;  // first index of each later regime
  std::vector<Regime> regimes;

  bool operator==(const TruthSector&) const = default;
};

struct SyntheticData {
  std::vector<ReturnSeries> series;
  std::vector<TruthSector> truth;
  Timestamp first_bar = 0;  // price anchor, one interval before the first return

  bool operator==(const SyntheticData&) const = default;
};

// Throws InvalidLoadings if any regime has sum b^2 > 1, InvalidArgument for
// short regimes, non-positive sigma or sectors of unequal total length.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

// Bar timestamps on weekday sessions, starting at the session open of
// first_day.
std::vector<Timestamp> trading_grid(std::size_t count, int interval_seconds,
                                    const Session& session, std::int64_t first_day);

// Prices implied by the returns, starting every sector at start_price.
std::vector<PriceObservation> synthetic_prices(const SyntheticData& data,
                                               double start_price = 100.0);

// A loading b in "b f + eps" form (unit idiosyncratic variance) expressed
// in the normalised form used by Regime.
double normalized_loading(double raw);

// Ten sectors with staggered low -> moderate -> very_high -> extremely_high
// -> moderate regimes; the common loading grows with volatility.
SyntheticSpec default_scenario(std::size_t sectors = 10, std::uint64_t seed = 7);

// Single stationary regime per sector; sector `hub` loads the common factor
// with raw weight hub_raw, all others with other_raw.
SyntheticSpec hub_scenario(std::size_t sectors, std::size_t length, double hub_raw,
                           double other_raw, std::uint64_t seed, std::size_t hub = 0);

// The ten sector symbols BM, CY, ... UT.
const std::vector<std::string>& sector_symbols();

}  // namespace regime_graph
