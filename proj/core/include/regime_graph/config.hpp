#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "regime_graph/market_data.hpp"
#include "regime_graph/market_graphs.hpp"
#include "regime_graph/phase_clustering.hpp"
#include "regime_graph/segmentation.hpp"

namespace regime_graph {

struct PipelineConfig {
  int interval_seconds = 1800;
  Session session;
  OvernightMode overnight = OvernightMode::Keep;
  SegmentationConfig segmentation;
  PhaseSelectionConfig phases;
  std::string reference_vols;  // CSV path; empty means the built-in table
  int match_window_days = 20;  // trading days
  std::size_t min_sector_coverage = 6;
  TopologyRule topology;
  int probe_days = 1;  // robustness probe shift, trading days
  std::uint64_t seed = 7;

  MatchConfig match_config() const;
  bool operator==(const PipelineConfig&) const = default;
};

// Throws InvalidArgument naming the first offending key.
void validate(const PipelineConfig& config);

// Grammar, one setting per line:
//   # comment
//   [section]          optional, prefixes following keys with "section."
//   key = value        value may be wrapped in double quotes
// Keys are the ones printed by write_config. Unknown keys are an error.
PipelineConfig parse_config(std::istream& in);
PipelineConfig read_config(const std::filesystem::path& path);

// Applies a single key=value pair, as used by parse_config.
void set_config_value(PipelineConfig& config, const std::string& key, const std::string& value);

// Canonical key = value text; parse_config(write_config(c)) == c.
void write_config(std::ostream& out, const PipelineConfig& config);
std::string config_text(const PipelineConfig& config);

ReferenceVols load_reference_vols(const PipelineConfig& config);

std::string format_time_of_day(int seconds);
int parse_time_of_day(const std::string& text);

}  // namespace regime_graph
