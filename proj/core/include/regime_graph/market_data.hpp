#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace regime_graph {

using Timestamp = std::int64_t;  // UTC epoch seconds

struct PriceObservation {
  std::string sector;
  Timestamp timestamp = 0;
  double price = 0.0;
};

// Trading session expressed as seconds after local midnight. Timestamps are
// shifted by utc_offset_seconds before the time of day is taken, so the
// default of 0 treats epoch seconds as exchange-local wall time.
struct Session {
  int start_seconds = 9 * 3600 + 30 * 60;
  int end_seconds = 16 * 3600;
  int utc_offset_seconds = 0;

  std::int64_t day_of(Timestamp ts) const;
  int time_of_day(Timestamp ts) const;
  Timestamp at(std::int64_t day, int seconds_of_day) const;

  bool operator==(const Session&) const = default;
};

struct Bar {
  Timestamp timestamp = 0;
  double price = 0.0;

  bool operator==(const Bar&) const = default;
};

struct BarSeries {
  std::string sector;
  int interval_seconds = 1800;
  Session session;
  std::vector<Bar> bars;
  // Ingestion notes, e.g. sessions dropped for having fewer than two bars.
  std::vector<std::string> warnings;
};

enum class OvernightMode { Keep, Drop };

struct ReturnSeries {
  std::string sector;
  std::vector<Timestamp> timestamps;  // timestamp of the later bar of each pair
  std::vector<double> returns;
  std::vector<bool> overnight;  // pair spans two sessions

  std::size_t size() const { return returns.size(); }
  bool operator==(const ReturnSeries&) const = default;
};

// Builds fixed-interval bars for a single sector: each grid point carries the
// last observed price at or before it, grid points before the first
// observation are omitted, and only days with at least one observation get a
// session. Observations must all belong to one sector.
BarSeries resample(std::span<const PriceObservation> observations,
                   int interval_seconds = 1800, const Session& session = {});

ReturnSeries log_returns(const BarSeries& bars,
                         OvernightMode mode = OvernightMode::Keep);

// Splits a mixed observation list into per-sector lists (sorted by sector id,
// input order preserved within a sector).
std::map<std::string, std::vector<PriceObservation>> group_by_sector(
    std::span<const PriceObservation> observations);

// Accepts either epoch seconds or ISO-8601 ("2007-07-25T09:30:00Z",
// "2007-07-25 09:30", optional fractional seconds and +hh:mm offset).
Timestamp parse_timestamp(const std::string& text);
bool looks_like_epoch(const std::string& text);
std::string format_iso8601(Timestamp ts);

// CSV with header `sector,timestamp,price`; files ending in .gz are
// decompressed on the fly. Timestamp format is detected from the first row.
std::vector<PriceObservation> read_observations_csv(
    const std::filesystem::path& path);
std::vector<PriceObservation> parse_observations_csv(std::istream& in);
void write_observations_csv(std::ostream& out,
                            std::span<const PriceObservation> observations);

// CSV with header `sector,timestamp,return`.
void write_returns_csv(std::ostream& out, std::span<const ReturnSeries> series);
std::vector<ReturnSeries> parse_returns_csv(std::istream& in,
                                            const Session& session = {});

std::string read_text_file(const std::filesystem::path& path);

}  // namespace regime_graph
