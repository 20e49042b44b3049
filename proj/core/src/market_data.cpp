#include "regime_graph/market_data.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "regime_graph/error.hpp"
#include "text_util.hpp"

namespace regime_graph {

namespace {

constexpr std::int64_t kSecondsPerDay = 86400;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

int parse_fixed_int(std::string_view s, std::size_t pos, std::size_t len,
                    const std::string& context) {
  if (pos + len > s.size()) {
    throw DomainError(ErrorCode::ParseError, "truncated timestamp '" + context + "'");
  }
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, value);
  if (ec != std::errc{} || ptr != s.data() + pos + len) {
    throw DomainError(ErrorCode::ParseError, "malformed timestamp '" + context + "'");
  }
  return value;
}

}  // namespace

std::int64_t Session::day_of(Timestamp ts) const {
  return floor_div(ts + utc_offset_seconds, kSecondsPerDay);
}

int Session::time_of_day(Timestamp ts) const {
  auto local = ts + utc_offset_seconds;
  return static_cast<int>(local - floor_div(local, kSecondsPerDay) * kSecondsPerDay);
}

Timestamp Session::at(std::int64_t day, int seconds_of_day) const {
  return day * kSecondsPerDay + seconds_of_day - utc_offset_seconds;
}

BarSeries resample(std::span<const PriceObservation> observations,
                   int interval_seconds, const Session& session) {
  if (observations.empty()) {
    throw DomainError(ErrorCode::EmptyInput, "no price observations");
  }
  if (interval_seconds <= 0 || session.end_seconds <= session.start_seconds ||
      (session.end_seconds - session.start_seconds) % interval_seconds != 0) {
    throw DomainError(ErrorCode::InvalidArgument,
                      "bar interval must evenly divide the session length");
  }
  const std::string& sector = observations.front().sector;
  for (const auto& obs : observations) {
    if (!(obs.price > 0.0) || !std::isfinite(obs.price)) {
      throw DomainError(ErrorCode::NonPositivePrice,
                        "non-positive price for " + obs.sector + " at " +
                            std::to_string(obs.timestamp));
    }
    if (obs.sector != sector) {
      throw DomainError(ErrorCode::InvalidArgument,
                        "resample expects a single sector, got " + sector +
                            " and " + obs.sector);
    }
  }

  std::vector<PriceObservation> sorted(observations.begin(), observations.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });

  std::set<std::int64_t> days;
  for (const auto& obs : sorted) {
    int tod = session.time_of_day(obs.timestamp);
    if (tod >= session.start_seconds && tod <= session.end_seconds) {
      days.insert(session.day_of(obs.timestamp));
    }
  }

  BarSeries out;
  out.sector = sector;
  out.interval_seconds = interval_seconds;
  out.session = session;

  const int steps = (session.end_seconds - session.start_seconds) / interval_seconds;
  std::size_t next = 0;
  bool have_price = false;
  double last_price = 0.0;
  for (auto day : days) {
    std::vector<Bar> day_bars;
    for (int k = 0; k <= steps; ++k) {
      Timestamp ts = session.at(day, session.start_seconds + k * interval_seconds);
      while (next < sorted.size() && sorted[next].timestamp <= ts) {
        last_price = sorted[next].price;
        have_price = true;
        ++next;
      }
      if (have_price) day_bars.push_back({ts, last_price});
    }
    if (day_bars.size() < 2) {
      out.warnings.push_back(sector + ": dropped short session on " +
                             format_iso8601(session.at(day, 0)).substr(0, 10) +
                             " (" + std::to_string(day_bars.size()) + " bar)");
      continue;
    }
    if (static_cast<int>(day_bars.size()) < steps + 1) {
      out.warnings.push_back(sector + ": short session on " +
                             format_iso8601(session.at(day, 0)).substr(0, 10) +
                             " (" + std::to_string(day_bars.size()) + " bars)");
    }
    out.bars.insert(out.bars.end(), day_bars.begin(), day_bars.end());
  }
  return out;
}

ReturnSeries log_returns(const BarSeries& bars, OvernightMode mode) {
  if (bars.bars.size() < 2) {
    throw DomainError(ErrorCode::TooShort,
                      bars.sector + ": need at least 2 bars for log returns");
  }
  ReturnSeries out;
  out.sector = bars.sector;
  const auto n = bars.bars.size() - 1;
  out.returns.reserve(n);
  out.timestamps.reserve(n);
  out.overnight.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    const auto& a = bars.bars[t];
    const auto& b = bars.bars[t + 1];
    bool overnight = bars.session.day_of(a.timestamp) != bars.session.day_of(b.timestamp);
    if (overnight && mode == OvernightMode::Drop) continue;
    out.returns.push_back(std::log(b.price) - std::log(a.price));
    out.timestamps.push_back(b.timestamp);
    out.overnight.push_back(overnight);
  }
  return out;
}

std::map<std::string, std::vector<PriceObservation>> group_by_sector(
    std::span<const PriceObservation> observations) {
  std::map<std::string, std::vector<PriceObservation>> out;
  for (const auto& obs : observations) out[obs.sector].push_back(obs);
  return out;
}

bool looks_like_epoch(const std::string& text) {
  std::string_view s = detail::trim(text);
  if (s.empty()) return false;
  std::size_t i = (s.front() == '-' || s.front() == '+') ? 1 : 0;
  if (i == s.size()) return false;
  return std::all_of(s.begin() + static_cast<std::ptrdiff_t>(i), s.end(),
                     [](char c) { return c >= '0' && c <= '9'; });
}

Timestamp parse_timestamp(const std::string& text) {
  std::string_view s = detail::trim(text);
  std::string ctx(s);
  if (looks_like_epoch(ctx)) {
    Timestamp value = 0;
    auto begin = s.data() + (s.front() == '+' ? 1 : 0);
    auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
      throw DomainError(ErrorCode::ParseError, "malformed epoch timestamp '" + ctx + "'");
    }
    return value;
  }
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') {
    throw DomainError(ErrorCode::ParseError, "unrecognised timestamp '" + ctx + "'");
  }
  using namespace std::chrono;
  int y = parse_fixed_int(s, 0, 4, ctx);
  int mo = parse_fixed_int(s, 5, 2, ctx);
  int d = parse_fixed_int(s, 8, 2, ctx);
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw DomainError(ErrorCode::ParseError, "invalid date '" + ctx + "'");
  std::int64_t secs = sys_days{ymd}.time_since_epoch().count() * kSecondsPerDay;

  std::size_t pos = 10;
  if (pos < s.size() && (s[pos] == 'T' || s[pos] == ' ')) {
    ++pos;
    int hh = parse_fixed_int(s, pos, 2, ctx);
    if (pos + 2 >= s.size() || s[pos + 2] != ':') {
      throw DomainError(ErrorCode::ParseError, "malformed time in '" + ctx + "'");
    }
    int mm = parse_fixed_int(s, pos + 3, 2, ctx);
    pos += 5;
    int ss = 0;
    if (pos < s.size() && s[pos] == ':') {
      ss = parse_fixed_int(s, pos + 1, 2, ctx);
      pos += 3;
      if (pos < s.size() && (s[pos] == '.' || s[pos] == ',')) {
        ++pos;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
      }
    }
    if (hh > 23 || mm > 59 || ss > 60) {
      throw DomainError(ErrorCode::ParseError, "time out of range in '" + ctx + "'");
    }
    secs += hh * 3600 + mm * 60 + ss;
  }
  if (pos < s.size()) {
    if (s[pos] == 'Z' && pos + 1 == s.size()) {
      pos += 1;
    } else if (s[pos] == '+' || s[pos] == '-') {
      int sign = s[pos] == '+' ? 1 : -1;
      int oh = parse_fixed_int(s, pos + 1, 2, ctx);
      std::size_t mpos = pos + 3;
      if (mpos < s.size() && s[mpos] == ':') ++mpos;
      int om = parse_fixed_int(s, mpos, 2, ctx);
      pos = mpos + 2;
      secs -= sign * (oh * 3600 + om * 60);
    }
  }
  if (pos != s.size()) {
    throw DomainError(ErrorCode::ParseError, "trailing characters in timestamp '" + ctx + "'");
  }
  return secs;
}

std::string format_iso8601(Timestamp ts) {
  using namespace std::chrono;
  auto day = floor_div(ts, kSecondsPerDay);
  auto rem = ts - day * kSecondsPerDay;
  year_month_day ymd{sys_days{days{day}}};
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%04d-%02u-%02uT%02d:%02d:%02dZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), static_cast<int>(rem / 3600),
                static_cast<int>((rem / 60) % 60), static_cast<int>(rem % 60));
  return buf.data();
}

std::string read_text_file(const std::filesystem::path& path) {
  if (path.extension() == ".gz") {
    gzFile file = gzopen(path.string().c_str(), "rb");
    if (file == nullptr) {
      throw DomainError(ErrorCode::IoError, "cannot open " + path.string());
    }
    std::string text;
    std::array<char, 1 << 16> buf{};
    int got = 0;
    while ((got = gzread(file, buf.data(), static_cast<unsigned>(buf.size()))) > 0) {
      text.append(buf.data(), static_cast<std::size_t>(got));
    }
    int err = 0;
    const char* msg = gzerror(file, &err);
    gzclose(file);
    if (got < 0 || (err != Z_OK && err != Z_STREAM_END)) {
      throw DomainError(ErrorCode::IoError,
                        "gzip read failed for " + path.string() + ": " + msg);
    }
    return text;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<PriceObservation> read_observations_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  return parse_observations_csv(in);
}

std::vector<PriceObservation> parse_observations_csv(std::istream& in) {
  std::vector<PriceObservation> out;
  std::string line;
  bool header_seen = false;
  int epoch_format = -1;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto trimmed = detail::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    auto fields = detail::split_csv(trimmed);
    if (!header_seen) {
      if (fields.size() != 3 || detail::lower(fields[0]) != "sector" ||
          detail::lower(fields[1]) != "timestamp" || detail::lower(fields[2]) != "price") {
        throw DomainError(ErrorCode::ParseError,
                          "expected header 'sector,timestamp,price'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 3) {
      throw DomainError(ErrorCode::ParseError,
                        "line " + std::to_string(line_no) + ": expected 3 fields");
    }
    bool epoch = looks_like_epoch(fields[1]);
    if (epoch_format < 0) epoch_format = epoch ? 1 : 0;
    if ((epoch_format == 1) != epoch) {
      throw DomainError(ErrorCode::ParseError,
                        "line " + std::to_string(line_no) + ": mixed timestamp formats");
    }
    PriceObservation obs;
    obs.sector = fields[0];
    obs.timestamp = parse_timestamp(fields[1]);
    obs.price = detail::parse_double(fields[2], line_no);
    out.push_back(std::move(obs));
  }
  if (!header_seen) throw DomainError(ErrorCode::EmptyInput, "empty observation file");
  return out;
}

void write_observations_csv(std::ostream& out,
                            std::span<const PriceObservation> observations) {
  out << "sector,timestamp,price\n";
  for (const auto& obs : observations) {
    out << obs.sector << ',' << obs.timestamp << ',' << detail::format_double(obs.price)
        << '\n';
  }
}

void write_returns_csv(std::ostream& out, std::span<const ReturnSeries> series) {
  out << "sector,timestamp,return\n";
  for (const auto& s : series) {
    for (std::size_t t = 0; t < s.size(); ++t) {
      out << s.sector << ',' << s.timestamps[t] << ',' << detail::format_double(s.returns[t])
          << '\n';
    }
  }
}

std::vector<ReturnSeries> parse_returns_csv(std::istream& in, const Session& session) {
  std::map<std::string, ReturnSeries> by_sector;
  std::vector<std::string> order;
  std::string line;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto trimmed = detail::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    auto fields = detail::split_csv(trimmed);
    if (!header_seen) {
      if (fields.size() != 3 || detail::lower(fields[0]) != "sector" ||
          detail::lower(fields[1]) != "timestamp" || detail::lower(fields[2]) != "return") {
        throw DomainError(ErrorCode::ParseError,
                          "expected header 'sector,timestamp,return'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 3) {
      throw DomainError(ErrorCode::ParseError,
                        "line " + std::to_string(line_no) + ": expected 3 fields");
    }
    auto [it, inserted] = by_sector.try_emplace(fields[0]);
    if (inserted) {
      it->second.sector = fields[0];
      order.push_back(fields[0]);
    }
    auto ts = parse_timestamp(fields[1]);
    auto& s = it->second;
    // The flag is not stored in the CSV; a return stamped at the session open
    // is the first bar of a new day and therefore spans the overnight gap.
    s.overnight.push_back(!s.timestamps.empty() &&
                          session.time_of_day(ts) == session.start_seconds);
    s.timestamps.push_back(ts);
    s.returns.push_back(detail::parse_double(fields[2], line_no));
  }
  std::vector<ReturnSeries> out;
  for (const auto& name : order) out.push_back(std::move(by_sector[name]));
  return out;
}

}  // namespace regime_graph
