#include "regime_graph/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "regime_graph/error.hpp"
#include "text_util.hpp"

namespace regime_graph {

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw DomainError(ErrorCode::ParseError, "bad value for " + key + ": '" + value + "'");
}

template <typename T>
T parse_integer(const std::string& key, const std::string& value) {
  auto s = detail::trim(value);
  T out{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) bad_value(key, value);
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    return detail::parse_double(value);
  } catch (const DomainError&) {
    bad_value(key, value);
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  auto v = detail::lower(detail::trim(value));
  if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
  if (v == "false" || v == "no" || v == "0" || v == "off") return false;
  bad_value(key, value);
}

int parse_offset(const std::string& key, const std::string& value) {
  auto s = std::string(detail::trim(value));
  if (s.find(':') == std::string::npos) return parse_integer<int>(key, s);
  if (s.size() != 6 || (s[0] != '+' && s[0] != '-') || s[3] != ':') bad_value(key, value);
  int h = parse_integer<int>(key, s.substr(1, 2));
  int m = parse_integer<int>(key, s.substr(4, 2));
  int total = h * 3600 + m * 60;
  return s[0] == '-' ? -total : total;
}

std::string format_offset(int seconds) {
  char buf[16];
  int a = seconds < 0 ? -seconds : seconds;
  std::snprintf(buf, sizeof buf, "%c%02d:%02d", seconds < 0 ? '-' : '+', a / 3600,
                (a % 3600) / 60);
  return buf;
}

void require(bool ok, const char* key) {
  if (!ok) throw DomainError(ErrorCode::InvalidArgument, std::string("invalid config: ") + key);
}

}  // namespace

std::string format_time_of_day(int seconds) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d:%02d", seconds / 3600, (seconds % 3600) / 60);
  return buf;
}

int parse_time_of_day(const std::string& text) {
  auto s = std::string(detail::trim(text));
  auto colon = s.find(':');
  if (colon == std::string::npos) bad_value("time of day", text);
  int h = parse_integer<int>("time of day", s.substr(0, colon));
  int m = parse_integer<int>("time of day", s.substr(colon + 1));
  if (h < 0 || h > 24 || m < 0 || m > 59) bad_value("time of day", text);
  return h * 3600 + m * 60;
}

MatchConfig PipelineConfig::match_config() const {
  MatchConfig m;
  m.min_sector_coverage = min_sector_coverage;
  // five trading days per calendar week
  m.window_seconds = static_cast<Timestamp>((match_window_days * 7 + 4) / 5) * 86400;
  return m;
}

void validate(const PipelineConfig& c) {
  require(c.interval_seconds > 0, "interval_seconds");
  require(c.session.start_seconds >= 0 && c.session.end_seconds > c.session.start_seconds &&
              c.session.end_seconds <= 86400,
          "session");
  require((c.session.end_seconds - c.session.start_seconds) % c.interval_seconds == 0,
          "interval_seconds (must divide the session)");
  require(c.session.utc_offset_seconds > -86400 && c.session.utc_offset_seconds < 86400,
          "utc_offset");
  require(c.segmentation.min_seg_len >= 2, "min_seg_len");
  require(c.segmentation.cutoff > 0, "cutoff");
  require(c.segmentation.long_segment_len > 0, "long_segment_len");
  require(c.segmentation.max_sweeps > 0, "max_sweeps");
  require(c.segmentation.refine_factor > 0 && c.segmentation.refine_factor < 1, "refine_factor");
  require(c.segmentation.refine_floor > 0, "refine_floor");
  require(c.phases.k_min >= 2 && c.phases.k_max <= 8 && c.phases.k_min <= c.phases.k_max,
          "k_range");
  require(c.match_window_days > 0, "match_window_days");
  require(c.min_sector_coverage > 0, "min_sector_coverage");
  require(c.topology.star_min_degree > 0, "star_min_degree");
  require(c.topology.star_max_diameter > 0, "star_max_diameter");
  require(c.topology.chain_diameter_slack > 0, "chain_diameter_slack");
  require(c.topology.chain_max_degree > 0, "chain_max_degree");
  require(c.probe_days > 0, "probe_days");
  require(c.seed > 0, "seed");
}

void set_config_value(PipelineConfig& c, const std::string& raw_key, const std::string& value) {
  // section prefixes are accepted but not required
  std::string key = raw_key;
  if (auto dot = key.rfind('.'); dot != std::string::npos) key = key.substr(dot + 1);

  if (key == "interval_seconds") c.interval_seconds = parse_integer<int>(key, value);
  else if (key == "session_start") c.session.start_seconds = parse_time_of_day(value);
  else if (key == "session_end") c.session.end_seconds = parse_time_of_day(value);
  else if (key == "utc_offset") c.session.utc_offset_seconds = parse_offset(key, value);
  else if (key == "overnight") {
    auto v = detail::lower(detail::trim(value));
    if (v == "keep") c.overnight = OvernightMode::Keep;
    else if (v == "drop") c.overnight = OvernightMode::Drop;
    else bad_value(key, value);
  }
  else if (key == "min_seg_len") c.segmentation.min_seg_len = parse_integer<std::size_t>(key, value);
  else if (key == "cutoff") c.segmentation.cutoff = parse_real(key, value);
  else if (key == "long_segment_len")
    c.segmentation.long_segment_len = parse_integer<std::size_t>(key, value);
  else if (key == "max_sweeps") c.segmentation.max_sweeps = parse_integer<int>(key, value);
  else if (key == "refine") c.segmentation.refine = parse_bool(key, value);
  else if (key == "refine_factor") c.segmentation.refine_factor = parse_real(key, value);
  else if (key == "refine_floor") c.segmentation.refine_floor = parse_real(key, value);
  else if (key == "k_min") c.phases.k_min = parse_integer<std::size_t>(key, value);
  else if (key == "k_max") c.phases.k_max = parse_integer<std::size_t>(key, value);
  else if (key == "k_range") {
    auto dash = value.find('-');
    if (dash == std::string::npos) bad_value(key, value);
    c.phases.k_min = parse_integer<std::size_t>(key, value.substr(0, dash));
    c.phases.k_max = parse_integer<std::size_t>(key, value.substr(dash + 1));
  }
  else if (key == "reference_vols") c.reference_vols = std::string(detail::trim(value));
  else if (key == "match_window_days") c.match_window_days = parse_integer<int>(key, value);
  else if (key == "min_sector_coverage")
    c.min_sector_coverage = parse_integer<std::size_t>(key, value);
  else if (key == "star_min_degree")
    c.topology.star_min_degree = parse_integer<std::size_t>(key, value);
  else if (key == "star_max_diameter")
    c.topology.star_max_diameter = parse_integer<std::size_t>(key, value);
  else if (key == "chain_diameter_slack")
    c.topology.chain_diameter_slack = parse_integer<std::size_t>(key, value);
  else if (key == "chain_max_degree")
    c.topology.chain_max_degree = parse_integer<std::size_t>(key, value);
  else if (key == "probe_days") c.probe_days = parse_integer<int>(key, value);
  else if (key == "seed") c.seed = parse_integer<std::uint64_t>(key, value);
  else throw DomainError(ErrorCode::ParseError, "unknown config key '" + raw_key + "'");
}

PipelineConfig parse_config(std::istream& in) {
  PipelineConfig c;
  std::string line, section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto s = detail::trim(line);
    if (auto hash = s.find('#'); hash != std::string_view::npos) s = detail::trim(s.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') {
        throw DomainError(ErrorCode::ParseError, "line " + std::to_string(line_no) +
                                                     ": unterminated section header");
      }
      section = std::string(detail::trim(s.substr(1, s.size() - 2)));
      continue;
    }
    auto eq = s.find('=');
    if (eq == std::string_view::npos) {
      throw DomainError(ErrorCode::ParseError,
                        "line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key(detail::trim(s.substr(0, eq)));
    std::string value(detail::trim(s.substr(eq + 1)));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    set_config_value(c, section.empty() ? key : section + "." + key, value);
  }
  validate(c);
  return c;
}

PipelineConfig read_config(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  return parse_config(in);
}

void write_config(std::ostream& out, const PipelineConfig& c) {
  out << "[market_data]\n"
      << "interval_seconds = " << c.interval_seconds << "\n"
      << "session_start = " << format_time_of_day(c.session.start_seconds) << "\n"
      << "session_end = " << format_time_of_day(c.session.end_seconds) << "\n"
      << "utc_offset = " << format_offset(c.session.utc_offset_seconds) << "\n"
      << "overnight = " << (c.overnight == OvernightMode::Keep ? "keep" : "drop") << "\n"
      << "\n[segmentation]\n"
      << "min_seg_len = " << c.segmentation.min_seg_len << "\n"
      << "cutoff = " << detail::format_double(c.segmentation.cutoff) << "\n"
      << "long_segment_len = " << c.segmentation.long_segment_len << "\n"
      << "max_sweeps = " << c.segmentation.max_sweeps << "\n"
      << "refine = " << (c.segmentation.refine ? "true" : "false") << "\n"
      << "refine_factor = " << detail::format_double(c.segmentation.refine_factor) << "\n"
      << "refine_floor = " << detail::format_double(c.segmentation.refine_floor) << "\n"
      << "\n[phase_clustering]\n"
      << "k_min = " << c.phases.k_min << "\n"
      << "k_max = " << c.phases.k_max << "\n"
      << "reference_vols = \"" << c.reference_vols << "\"\n"
      << "match_window_days = " << c.match_window_days << "\n"
      << "min_sector_coverage = " << c.min_sector_coverage << "\n"
      << "\n[correlation]\n"
      << "probe_days = " << c.probe_days << "\n"
      << "\n[market_graphs]\n"
      << "star_min_degree = " << c.topology.star_min_degree << "\n"
      << "star_max_diameter = " << c.topology.star_max_diameter << "\n"
      << "chain_diameter_slack = " << c.topology.chain_diameter_slack << "\n"
      << "chain_max_degree = " << c.topology.chain_max_degree << "\n"
      << "\n[synthetic]\n"
      << "seed = " << c.seed << "\n";
}

std::string config_text(const PipelineConfig& config) {
  std::ostringstream out;
  write_config(out, config);
  return out.str();
}

ReferenceVols load_reference_vols(const PipelineConfig& config) {
  if (config.reference_vols.empty()) return default_reference_vols();
  std::istringstream in(read_text_file(config.reference_vols));
  return parse_reference_vols(in);
}

}  // namespace regime_graph
