#include "regime_graph/serialization.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "regime_graph/error.hpp"
#include "text_util.hpp"

namespace regime_graph {

namespace {

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t parse_hex64(const std::string& s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw DomainError(ErrorCode::ParseError, "bad hash '" + s + "'");
  }
  return v;
}

json config_scalar(const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  std::int64_t i = 0;
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), i);
  if (ec == std::errc{} && p == value.data() + value.size() && !value.empty()) return i;
  double d = 0;
  auto [q, ec2] = std::from_chars(value.data(), value.data() + value.size(), d);
  if (ec2 == std::errc{} && q == value.data() + value.size() && !value.empty()) return d;
  return value;
}

}  // namespace

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

json make_envelope(std::string_view kind, const PipelineConfig& config, json payload) {
  return json{{"schema_version", kSchemaVersion},
              {"kind", std::string(kind)},
              {"config", config},
              {"payload", std::move(payload)}};
}

Envelope open_envelope(const json& doc, std::string_view expected_kind) {
  try {
    if (!doc.is_object() || doc.value("schema_version", -1) != kSchemaVersion) {
      throw DomainError(ErrorCode::ParseError, "not a schema_version " +
                                                   std::to_string(kSchemaVersion) + " artifact");
    }
    Envelope e;
    e.kind = doc.at("kind").get<std::string>();
    if (!expected_kind.empty() && e.kind != expected_kind) {
      throw DomainError(ErrorCode::ParseError, "expected a '" + std::string(expected_kind) +
                                                   "' artifact, got '" + e.kind + "'");
    }
    e.config = doc.at("config").get<PipelineConfig>();
    e.payload = doc.at("payload");
    return e;
  } catch (const json::exception& ex) {
    throw DomainError(ErrorCode::ParseError, ex.what());
  }
}

Envelope read_envelope(const std::filesystem::path& path, std::string_view expected_kind) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::exception& ex) {
    throw DomainError(ErrorCode::ParseError, path.string() + ": " + ex.what());
  }
  return open_envelope(doc, expected_kind);
}

// --- config: flat key/value object keyed like the text format

void to_json(json& j, const PipelineConfig& c) {
  j = json::object();
  std::istringstream in(config_text(c));
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key(detail::trim(std::string_view(line).substr(0, eq)));
    std::string value(detail::trim(std::string_view(line).substr(eq + 1)));
    if (value.size() >= 2 && value.front() == '"') {
      j[key] = value.substr(1, value.size() - 2);
    } else {
      j[key] = config_scalar(value);
    }
  }
}

void from_json(const json& j, PipelineConfig& c) {
  c = PipelineConfig{};
  for (const auto& [key, value] : j.items()) {
    std::string text;
    if (value.is_string()) text = value.get<std::string>();
    else if (value.is_boolean()) text = value.get<bool>() ? "true" : "false";
    else if (value.is_number_float()) text = detail::format_double(value.get<double>());
    else text = value.dump();
    set_config_value(c, key, text);
  }
  validate(c);
}

// --- market data

void to_json(json& j, const ReturnSeries& s) {
  j = json{{"sector", s.sector},
           {"timestamps", s.timestamps},
           {"returns", s.returns},
           {"overnight", s.overnight}};
}

void from_json(const json& j, ReturnSeries& s) {
  j.at("sector").get_to(s.sector);
  j.at("timestamps").get_to(s.timestamps);
  j.at("returns").get_to(s.returns);
  s.overnight = j.at("overnight").get<std::vector<bool>>();
  if (s.timestamps.size() != s.returns.size() || s.overnight.size() != s.returns.size()) {
    throw DomainError(ErrorCode::ParseError, s.sector + ": misaligned return series");
  }
}

// --- segmentation

void to_json(json& j, const GaussianParams& p) {
  j = json{{"mean", p.mean}, {"std", p.std}, {"count", p.count}};
}

void from_json(const json& j, GaussianParams& p) {
  j.at("mean").get_to(p.mean);
  j.at("std").get_to(p.std);
  j.at("count").get_to(p.count);
}

void to_json(json& j, const Boundary& b) {
  j = json{{"index", b.index},
           {"timestamp", b.timestamp},
           {"divergence", b.divergence},
           {"refined", b.refined}};
}

void from_json(const json& j, Boundary& b) {
  j.at("index").get_to(b.index);
  j.at("timestamp").get_to(b.timestamp);
  j.at("divergence").get_to(b.divergence);
  j.at("refined").get_to(b.refined);
}

void to_json(json& j, const Segment& s) {
  j = json{{"start", s.start},       {"end", s.end},
           {"start_ts", s.start_ts}, {"end_ts", s.end_ts},
           {"mean", s.params.mean},  {"std", s.params.std},
           {"count", s.params.count}};
}

void from_json(const json& j, Segment& s) {
  j.at("start").get_to(s.start);
  j.at("end").get_to(s.end);
  j.at("start_ts").get_to(s.start_ts);
  j.at("end_ts").get_to(s.end_ts);
  j.at("mean").get_to(s.params.mean);
  j.at("std").get_to(s.params.std);
  j.at("count").get_to(s.params.count);
}

void to_json(json& j, const Segmentation& s) {
  j = json{{"sector", s.sector},
           {"data_hash", hex64(s.data_hash)},
           {"n", s.n},
           {"min_seg_len", s.min_seg_len},
           {"cutoff", s.cutoff},
           {"converged", s.converged},
           {"clamped", s.clamped},
           {"boundaries", s.boundaries},
           {"segments", s.segments}};
}

void from_json(const json& j, Segmentation& s) {
  j.at("sector").get_to(s.sector);
  s.data_hash = parse_hex64(j.at("data_hash").get<std::string>());
  j.at("n").get_to(s.n);
  j.at("min_seg_len").get_to(s.min_seg_len);
  j.at("cutoff").get_to(s.cutoff);
  j.at("converged").get_to(s.converged);
  j.at("clamped").get_to(s.clamped);
  j.at("boundaries").get_to(s.boundaries);
  j.at("segments").get_to(s.segments);
}

// --- phases

void to_json(json& j, const Phase& p) { j = std::string(phase_name(p)); }
void from_json(const json& j, Phase& p) { p = parse_phase(j.get<std::string>()); }

void to_json(json& j, const Merge& m) {
  j = json{{"left", m.left}, {"right", m.right}, {"height", m.height}, {"size", m.size}};
}

void from_json(const json& j, Merge& m) {
  j.at("left").get_to(m.left);
  j.at("right").get_to(m.right);
  j.at("height").get_to(m.height);
  j.at("size").get_to(m.size);
}

void to_json(json& j, const ClusterTree& t) {
  j = json{{"leaf_count", t.leaf_count}, {"merges", t.merges}};
}

void from_json(const json& j, ClusterTree& t) {
  j.at("leaf_count").get_to(t.leaf_count);
  j.at("merges").get_to(t.merges);
}

void to_json(json& j, const PhasedSegment& s) {
  j = json{{"start", s.start},       {"end", s.end},         {"start_ts", s.start_ts},
           {"end_ts", s.end_ts},     {"mean", s.params.mean}, {"std", s.params.std},
           {"count", s.params.count}, {"cluster", s.cluster}, {"phase", s.phase}};
}

void from_json(const json& j, PhasedSegment& s) {
  j.at("start").get_to(s.start);
  j.at("end").get_to(s.end);
  j.at("start_ts").get_to(s.start_ts);
  j.at("end_ts").get_to(s.end_ts);
  j.at("mean").get_to(s.params.mean);
  j.at("std").get_to(s.params.std);
  j.at("count").get_to(s.params.count);
  j.at("cluster").get_to(s.cluster);
  j.at("phase").get_to(s.phase);
}

void to_json(json& j, const PhaseAssignment& a) {
  j = json{{"sector", a.sector},
           {"data_hash", hex64(a.data_hash)},
           {"k", a.k},
           {"threshold_range", {a.threshold_lo, a.threshold_hi}},
           {"degenerate", a.degenerate},
           {"manual", a.manual},
           {"segments", a.segments}};
}

void from_json(const json& j, PhaseAssignment& a) {
  j.at("sector").get_to(a.sector);
  a.data_hash = parse_hex64(j.at("data_hash").get<std::string>());
  j.at("k").get_to(a.k);
  const auto& range = j.at("threshold_range");
  range.at(0).get_to(a.threshold_lo);
  range.at(1).get_to(a.threshold_hi);
  j.at("degenerate").get_to(a.degenerate);
  j.at("manual").get_to(a.manual);
  j.at("segments").get_to(a.segments);
}

void to_json(json& j, const SectorWindow& w) {
  j = json{{"start_ts", w.start_ts}, {"end_ts", w.end_ts}, {"phase", w.phase}};
}

void from_json(const json& j, SectorWindow& w) {
  j.at("start_ts").get_to(w.start_ts);
  j.at("end_ts").get_to(w.end_ts);
  j.at("phase").get_to(w.phase);
}

void to_json(json& j, const CorrespondingSegment& c) {
  j = json{{"id", c.id},
           {"dominant_phase", c.dominant_phase},
           {"windows", c.windows},
           {"entry_ranks", c.entry_ranks},
           {"absent", c.absent}};
}

void from_json(const json& j, CorrespondingSegment& c) {
  j.at("id").get_to(c.id);
  j.at("dominant_phase").get_to(c.dominant_phase);
  j.at("windows").get_to(c.windows);
  j.at("entry_ranks").get_to(c.entry_ranks);
  j.at("absent").get_to(c.absent);
}

// --- correlation

void to_json(json& j, const Interval& i) { j = json{{"start", i.start}, {"end", i.end}}; }

void from_json(const json& j, Interval& i) {
  j.at("start").get_to(i.start);
  j.at("end").get_to(i.end);
}

void to_json(json& j, const CorrelationMatrix& c) {
  json rows = json::array();
  for (std::size_t i = 0; i < c.size(); ++i) {
    json row = json::array();
    for (std::size_t k = 0; k < c.size(); ++k) row.push_back(c(i, k));
    rows.push_back(std::move(row));
  }
  j = json{{"sectors", c.sectors},
           {"values", std::move(rows)},
           {"interval", c.interval},
           {"sample_count", c.sample_count},
           {"overnight_included", c.overnight_included}};
}

void from_json(const json& j, CorrelationMatrix& c) {
  j.at("sectors").get_to(c.sectors);
  const auto& rows = j.at("values");
  if (rows.size() != c.sectors.size()) throw DomainError(ErrorCode::ParseError, "matrix is not square");
  c.values.clear();
  for (const auto& row : rows) {
    if (row.size() != c.sectors.size()) throw DomainError(ErrorCode::ParseError, "matrix is not square");
    for (const auto& v : row) c.values.push_back(v.get<double>());
  }
  j.at("interval").get_to(c.interval);
  j.at("sample_count").get_to(c.sample_count);
  j.at("overnight_included").get_to(c.overnight_included);
}

void to_json(json& j, const SectorAverages& a) {
  j = json{{"sectors", a.sectors},
           {"per_sector", a.per_sector},
           {"market", a.market},
           {"ranks", a.ranks}};
}

void from_json(const json& j, SectorAverages& a) {
  j.at("sectors").get_to(a.sectors);
  j.at("per_sector").get_to(a.per_sector);
  j.at("market").get_to(a.market);
  j.at("ranks").get_to(a.ranks);
}

void to_json(json& j, const IntervalException& e) {
  j = json{{"sector", e.sector}, {"covering_phases", e.covering_phases}};
}

void from_json(const json& j, IntervalException& e) {
  j.at("sector").get_to(e.sector);
  j.at("covering_phases").get_to(e.covering_phases);
}

void to_json(json& j, const IntervalSelection& s) {
  j = json{{"interval", s.interval}, {"covered", s.covered}, {"exceptions", s.exceptions}};
}

void from_json(const json& j, IntervalSelection& s) {
  j.at("interval").get_to(s.interval);
  j.at("covered").get_to(s.covered);
  j.at("exceptions").get_to(s.exceptions);
}

// --- graphs

void to_json(json& j, const Edge& e) {
  j = json{{"i", e.i}, {"j", e.j}, {"correlation", e.correlation}, {"distance", e.distance}};
}

void from_json(const json& j, Edge& e) {
  j.at("i").get_to(e.i);
  j.at("j").get_to(e.j);
  j.at("correlation").get_to(e.correlation);
  j.at("distance").get_to(e.distance);
}

void to_json(json& j, const CorrelationGraph& g) {
  json edges = json::array();
  for (const auto& e : g.edges) {
    json item = e;
    item["a"] = g.nodes.at(e.i);
    item["b"] = g.nodes.at(e.j);
    edges.push_back(std::move(item));
  }
  j = json{{"kind", std::string(graph_kind_name(g.kind))},
           {"nodes", g.nodes},
           {"edges", std::move(edges)},
           {"interval", g.source_interval}};
}

void from_json(const json& j, CorrelationGraph& g) {
  g.kind = parse_graph_kind(j.at("kind").get<std::string>());
  j.at("nodes").get_to(g.nodes);
  g.edges.clear();
  for (const auto& item : j.at("edges")) {
    Edge e = item.get<Edge>();
    if (e.i >= g.nodes.size() || e.j >= g.nodes.size()) {
      throw DomainError(ErrorCode::ParseError, "edge references an unknown node");
    }
    g.edges.push_back(e);
  }
  j.at("interval").get_to(g.source_interval);
}

void to_json(json& j, const TopologyMetrics& m) {
  j = json{{"max_degree", m.max_degree},
           {"diameter", m.diameter},
           {"leaf_count", m.leaf_count},
           {"mean_occupation_layer", m.mean_occupation_layer},
           {"hub", m.hub},
           {"classification", std::string(topology_class_name(m.classification))},
           {"degree", m.degree},
           {"hub_distance", m.hub_distance}};
}

void from_json(const json& j, TopologyMetrics& m) {
  j.at("max_degree").get_to(m.max_degree);
  j.at("diameter").get_to(m.diameter);
  j.at("leaf_count").get_to(m.leaf_count);
  j.at("mean_occupation_layer").get_to(m.mean_occupation_layer);
  j.at("hub").get_to(m.hub);
  auto cls = j.at("classification").get<std::string>();
  if (cls == "star_like") m.classification = TopologyClass::StarLike;
  else if (cls == "chain_like") m.classification = TopologyClass::ChainLike;
  else if (cls == "intermediate") m.classification = TopologyClass::Intermediate;
  else throw DomainError(ErrorCode::ParseError, "unknown topology class '" + cls + "'");
  j.at("degree").get_to(m.degree);
  j.at("hub_distance").get_to(m.hub_distance);
}

void to_json(json& j, const TreeDiff& d) {
  j = json{{"broken", d.broken},
           {"formed", d.formed},
           {"preserved_backbone", d.preserved_backbone},
           {"primitive_count", d.primitive_count}};
}

void from_json(const json& j, TreeDiff& d) {
  j.at("broken").get_to(d.broken);
  j.at("formed").get_to(d.formed);
  j.at("preserved_backbone").get_to(d.preserved_backbone);
  j.at("primitive_count").get_to(d.primitive_count);
}

// --- synthetic truth

void to_json(json& j, const Regime& r) {
  j = json{{"length", r.length}, {"sigma", r.sigma}, {"mean", r.mean}, {"loadings", r.loadings}};
  j["phase"] = r.phase ? json(*r.phase) : json(nullptr);
}

void from_json(const json& j, Regime& r) {
  j.at("length").get_to(r.length);
  j.at("sigma").get_to(r.sigma);
  j.at("mean").get_to(r.mean);
  j.at("loadings").get_to(r.loadings);
  if (j.contains("phase") && !j.at("phase").is_null()) r.phase = j.at("phase").get<Phase>();
  else r.phase.reset();
}

void to_json(json& j, const TruthSector& t) {
  j = json{{"sector", t.sector}, {"boundaries", t.boundaries}, {"regimes", t.regimes}};
}

void from_json(const json& j, TruthSector& t) {
  j.at("sector").get_to(t.sector);
  j.at("boundaries").get_to(t.boundaries);
  j.at("regimes").get_to(t.regimes);
}

}  // namespace regime_graph
