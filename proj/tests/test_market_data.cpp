#include <doctest.h>

#include <zlib.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "regime_graph/error.hpp"
#include "regime_graph/market_data.hpp"
#include "support.hpp"

using namespace regime_graph;

namespace {

Timestamp at(const std::string& iso) { return parse_timestamp(iso); }

std::vector<PriceObservation> random_walk(std::uint64_t seed, int days) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> gap(60, 2400);
  std::normal_distribution<double> step(0.0, 0.002);
  std::vector<PriceObservation> out;
  double p = 100.0;
  Session s;
  for (int d = 0; d < days; ++d) {
    Timestamp t = s.at(13515 + d, s.start_seconds - 600);
    Timestamp stop = s.at(13515 + d, s.end_seconds + 300);
    while (t < stop) {
      p *= std::exp(step(rng));
      out.push_back({"FN", t, p});
      t += gap(rng);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("bars before the first trade are omitted") {
  std::vector<PriceObservation> obs = {{"BM", at("2007-07-25T09:31:00Z"), 100.0},
                                       {"BM", at("2007-07-25T09:58:00Z"), 101.0}};
  auto bars = resample(obs);
  REQUIRE(!bars.bars.empty());
  CHECK(bars.bars.front().timestamp == at("2007-07-25T10:00:00Z"));
  CHECK(bars.bars.front().price == 101.0);
  CHECK(bars.bars.size() == 13);
  CHECK(bars.bars.back().timestamp == at("2007-07-25T16:00:00Z"));
}

TEST_CASE("a single trade is forward filled") {
  std::vector<PriceObservation> obs = {{"BM", at("2007-07-25T09:30:00Z"), 50.0}};
  Session s;
  s.end_seconds = 10 * 3600 + 30 * 60;
  auto bars = resample(obs, 1800, s);
  REQUIRE(bars.bars.size() == 3);
  CHECK(bars.bars[0].timestamp == at("2007-07-25T09:30:00Z"));
  CHECK(bars.bars[1].timestamp == at("2007-07-25T10:00:00Z"));
  CHECK(bars.bars[2].timestamp == at("2007-07-25T10:30:00Z"));
  for (const auto& b : bars.bars) CHECK(b.price == 50.0);
}

TEST_CASE("a full session gives 13 half-hour returns") {
  std::vector<PriceObservation> obs = {{"BM", at("2007-07-25T09:30:00Z"), 50.0},
                                       {"BM", at("2007-07-25T12:00:00Z"), 51.0}};
  auto bars = resample(obs);
  CHECK(bars.bars.size() == 14);
  auto r = log_returns(bars);
  CHECK(r.size() == 13);
  for (std::size_t i = 1; i < bars.bars.size(); ++i) {
    CHECK(bars.bars[i].timestamp - bars.bars[i - 1].timestamp == 1800);
  }
}

TEST_CASE("resample errors") {
  std::vector<PriceObservation> none;
  CHECK_THROWS_AS(resample(none), DomainError);
  try {
    resample(none);
  } catch (const DomainError& e) {
    CHECK(e.code() == ErrorCode::EmptyInput);
  }
  std::vector<PriceObservation> bad = {{"BM", at("2007-07-25T10:00:00Z"), 0.0}};
  try {
    resample(bad);
    FAIL("expected NonPositivePrice");
  } catch (const DomainError& e) {
    CHECK(e.code() == ErrorCode::NonPositivePrice);
  }
  std::vector<PriceObservation> ok = {{"BM", at("2007-07-25T10:00:00Z"), 1.0}};
  CHECK_THROWS_AS(resample(ok, 1700), DomainError);
}

TEST_CASE("log return examples") {
  BarSeries b;
  b.bars = {{0, 100.0}, {1800, 100.0}, {3600, 100.0}};
  b.session.start_seconds = 0;
  auto flat = log_returns(b);
  CHECK(flat.returns == std::vector<double>{0.0, 0.0});

  b.bars = {{0, 100.0}, {1800, 110.0}};
  CHECK(log_returns(b).returns[0] == doctest::Approx(0.0953101798).epsilon(1e-9));

  b.bars = {{0, std::exp(1.0)}, {1800, std::exp(2.0)}};
  CHECK(log_returns(b).returns[0] == doctest::Approx(1.0).epsilon(1e-15));

  b.bars = {{0, 1.0}};
  try {
    log_returns(b);
    FAIL("expected TooShort");
  } catch (const DomainError& e) {
    CHECK(e.code() == ErrorCode::TooShort);
  }
}

TEST_CASE("overnight returns are flagged, or dropped on request") {
  std::vector<PriceObservation> obs = {{"EN", at("2007-07-25T09:30:00Z"), 10.0},
                                       {"EN", at("2007-07-26T09:30:00Z"), 11.0}};
  auto bars = resample(obs);
  REQUIRE(bars.bars.size() == 28);
  auto keep = log_returns(bars);
  CHECK(keep.size() == 27);
  std::size_t flagged = 0;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep.overnight[i]) {
      ++flagged;
      CHECK(keep.timestamps[i] == at("2007-07-26T09:30:00Z"));
      CHECK(keep.returns[i] == doctest::Approx(std::log(1.1)));
    }
  }
  CHECK(flagged == 1);
  auto drop = log_returns(bars, OvernightMode::Drop);
  CHECK(drop.size() == 26);
  for (bool f : drop.overnight) CHECK_FALSE(f);
}

TEST_CASE("a lone first bar is dropped with a warning") {
  std::vector<PriceObservation> obs = {{"TL", at("2007-07-03T15:59:00Z"), 10.0},
                                       {"TL", at("2007-07-05T12:59:00Z"), 10.2}};
  auto bars = resample(obs);
  // 07-03 yields only the 16:00 bar; 07-05 is forward filled from it
  CHECK(bars.bars.size() == 14);
  CHECK(bars.bars.front().timestamp == at("2007-07-05T09:30:00Z"));
  CHECK(bars.bars.front().price == 10.0);
  REQUIRE(bars.warnings.size() == 1);
  CHECK(bars.warnings[0].find("dropped") != std::string::npos);
}

TEST_CASE("resample invariants") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto obs = random_walk(seed, 7);
    auto bars = resample(obs);
    Session s;
    for (std::size_t i = 0; i < bars.bars.size(); ++i) {
      int tod = s.time_of_day(bars.bars[i].timestamp);
      CHECK(tod >= s.start_seconds);
      CHECK(tod <= s.end_seconds);
      if (i > 0 && s.day_of(bars.bars[i].timestamp) == s.day_of(bars.bars[i - 1].timestamp)) {
        CHECK(bars.bars[i].timestamp - bars.bars[i - 1].timestamp == 1800);
      }
    }

    // idempotent on its own bars
    std::vector<PriceObservation> again;
    for (const auto& b : bars.bars) again.push_back({"FN", b.timestamp, b.price});
    CHECK(resample(again).bars == bars.bars);

    // telescoping sums
    auto r = log_returns(bars);
    CHECK(r.size() == bars.bars.size() - 1);
    std::mt19937_64 rng(seed);
    for (int k = 0; k < 20; ++k) {
      std::uniform_int_distribution<std::size_t> pick(0, r.size() - 1);
      auto a = pick(rng), b = pick(rng);
      if (a > b) std::swap(a, b);
      double sum = 0.0;
      for (auto i = a; i <= b; ++i) sum += r.returns[i];
      double want = std::log(bars.bars[b + 1].price / bars.bars[a].price);
      CHECK(std::abs(sum - want) <= 1e-12 * std::max(1.0, std::abs(want)));
    }
    for (double v : r.returns) CHECK(std::isfinite(v));
  }
}

TEST_CASE("timestamps") {
  CHECK(parse_timestamp("0") == 0);
  CHECK(parse_timestamp("1185355800") == 1185355800);
  CHECK(parse_timestamp("2007-07-25T09:30:00Z") == 1185355800);
  CHECK(parse_timestamp("2007-07-25 09:30") == 1185355800);
  CHECK(parse_timestamp("2007-07-25T05:30:00-04:00") == 1185355800);
  CHECK(parse_timestamp("2007-07-25T09:30:00.250Z") == 1185355800);
  CHECK(format_iso8601(1185355800) == "2007-07-25T09:30:00Z");
  CHECK(looks_like_epoch("1185355800"));
  CHECK_FALSE(looks_like_epoch("2007-07-25"));
  CHECK_THROWS_AS(parse_timestamp("yesterday"), DomainError);
}

TEST_CASE("observation CSV") {
  std::istringstream iso("sector,timestamp,price\nBM,2007-07-25T09:31:00Z,100\n"
                         "CY,2007-07-25T09:32:00Z,99.5\n");
  auto obs = parse_observations_csv(iso);
  REQUIRE(obs.size() == 2);
  CHECK(obs[1].sector == "CY");
  CHECK(obs[1].price == 99.5);

  std::istringstream mixed("sector,timestamp,price\nBM,2007-07-25T09:31:00Z,100\nBM,1185355900,1\n");
  CHECK_THROWS_AS(parse_observations_csv(mixed), DomainError);

  std::ostringstream out;
  write_observations_csv(out, obs);
  std::istringstream back(out.str());
  auto again = parse_observations_csv(back);
  REQUIRE(again.size() == obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    CHECK(again[i].sector == obs[i].sector);
    CHECK(again[i].timestamp == obs[i].timestamp);
    CHECK(again[i].price == obs[i].price);
  }
}

TEST_CASE("gzip input") {
  auto dir = std::filesystem::temp_directory_path() / "regime_graph_md_test";
  std::filesystem::create_directories(dir);
  auto path = dir / "obs.csv.gz";
  std::string text = "sector,timestamp,price\nBM,1185355860,100\nBM,1185357480,101\n";
  gzFile f = gzopen(path.string().c_str(), "wb");
  REQUIRE(f != nullptr);
  gzwrite(f, text.data(), static_cast<unsigned>(text.size()));
  gzclose(f);
  auto obs = read_observations_csv(path);
  REQUIRE(obs.size() == 2);
  CHECK(obs[1].price == 101.0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("returns CSV round trip") {
  auto obs = random_walk(9, 3);
  auto r = log_returns(resample(obs));
  std::ostringstream out;
  std::vector<ReturnSeries> list{r};
  write_returns_csv(out, list);
  std::istringstream in(out.str());
  auto back = parse_returns_csv(in);
  REQUIRE(back.size() == 1);
  CHECK(back[0] == r);
}

TEST_CASE("group_by_sector keeps input order") {
  std::vector<PriceObservation> obs = {{"TL", 3, 1}, {"BM", 2, 1}, {"TL", 1, 2}};
  auto g = group_by_sector(obs);
  REQUIRE(g.size() == 2);
  CHECK(g.begin()->first == "BM");
  CHECK(g["TL"][0].timestamp == 3);
  CHECK(g["TL"][1].timestamp == 1);
}
