#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "regime_graph/config.hpp"
#include "regime_graph/correlation.hpp"
#include "regime_graph/market_data.hpp"
#include "regime_graph/market_graphs.hpp"
#include "regime_graph/phase_clustering.hpp"
#include "regime_graph/segmentation.hpp"
#include "regime_graph/synthetic.hpp"

namespace regime_graph {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// Every artifact is {"schema_version", "kind", "config", "payload"}.
json make_envelope(std::string_view kind, const PipelineConfig& config, json payload);

struct Envelope {
  std::string kind;
  PipelineConfig config;
  json payload;
};

// Throws ParseError on a wrong schema version or, when expected_kind is not
// empty, a different kind.
Envelope open_envelope(const json& doc, std::string_view expected_kind = {});
Envelope read_envelope(const std::filesystem::path& path, std::string_view expected_kind = {});

// Stable text form: two-space indent and a trailing newline.
std::string dump(const json& doc);

void to_json(json& j, const PipelineConfig& c);
void from_json(const json& j, PipelineConfig& c);

void to_json(json& j, const ReturnSeries& s);
void from_json(const json& j, ReturnSeries& s);

void to_json(json& j, const GaussianParams& p);
void from_json(const json& j, GaussianParams& p);
void to_json(json& j, const Boundary& b);
void from_json(const json& j, Boundary& b);
void to_json(json& j, const Segment& s);
void from_json(const json& j, Segment& s);
void to_json(json& j, const Segmentation& s);
void from_json(const json& j, Segmentation& s);

void to_json(json& j, const Phase& p);
void from_json(const json& j, Phase& p);
void to_json(json& j, const Merge& m);
void from_json(const json& j, Merge& m);
void to_json(json& j, const ClusterTree& t);
void from_json(const json& j, ClusterTree& t);
void to_json(json& j, const PhasedSegment& s);
void from_json(const json& j, PhasedSegment& s);
void to_json(json& j, const PhaseAssignment& a);
void from_json(const json& j, PhaseAssignment& a);
void to_json(json& j, const SectorWindow& w);
void from_json(const json& j, SectorWindow& w);
void to_json(json& j, const CorrespondingSegment& c);
void from_json(const json& j, CorrespondingSegment& c);

void to_json(json& j, const Interval& i);
void from_json(const json& j, Interval& i);
void to_json(json& j, const CorrelationMatrix& c);
void from_json(const json& j, CorrelationMatrix& c);
void to_json(json& j, const SectorAverages& a);
void from_json(const json& j, SectorAverages& a);
void to_json(json& j, const IntervalException& e);
void from_json(const json& j, IntervalException& e);
void to_json(json& j, const IntervalSelection& s);
void from_json(const json& j, IntervalSelection& s);

void to_json(json& j, const Edge& e);
void from_json(const json& j, Edge& e);
void to_json(json& j, const CorrelationGraph& g);
void from_json(const json& j, CorrelationGraph& g);
void to_json(json& j, const TopologyMetrics& m);
void from_json(const json& j, TopologyMetrics& m);
void to_json(json& j, const TreeDiff& d);
void from_json(const json& j, TreeDiff& d);

void to_json(json& j, const Regime& r);
void from_json(const json& j, Regime& r);
void to_json(json& j, const TruthSector& t);
void from_json(const json& j, TruthSector& t);

}  // namespace regime_graph
