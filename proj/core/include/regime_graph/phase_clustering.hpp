#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "regime_graph/segmentation.hpp"

namespace regime_graph {

enum class Phase { ExtremelyLow, Low, Moderate, High, VeryHigh, ExtremelyHigh };

inline constexpr std::size_t kPhaseCount = 6;
inline constexpr std::array<Phase, kPhaseCount> kAllPhases = {
    Phase::ExtremelyLow, Phase::Low,      Phase::Moderate,
    Phase::High,         Phase::VeryHigh, Phase::ExtremelyHigh};

std::string_view phase_name(Phase p);   // "extremely_low" ... "extremely_high"
std::string_view phase_color(Phase p);  // black, blue, green, yellow, orange, red
char phase_letter(Phase p);             // K, B, G, Y, O, R
// Accepts either the name or the color.
Phase parse_phase(std::string_view text);

// Macroeconomic grouping of the volatility phases.
enum class Band { Growth, Correction, Crisis, Crash };
Band band_of(Phase p);
std::string_view band_name(Band b);

// Log-likelihood ratio between fitting the pooled sample with one Gaussian
// and fitting the two samples separately, computed from sufficient
// statistics. Zero for identical summaries.
double segment_distance(const GaussianParams& a, const GaussianParams& b);

struct Merge {
  std::size_t left = 0;   // node ids: leaves 0..n-1, merge k creates node n+k
  std::size_t right = 0;
  double height = 0.0;
  std::size_t size = 0;

  bool operator==(const Merge&) const = default;
};

struct ClusterTree {
  std::size_t leaf_count = 0;
  std::vector<Merge> merges;  // heights non-decreasing

  bool operator==(const ClusterTree&) const = default;
};

// Complete-link agglomeration over a dense row-major n x n distance matrix.
// Ties go to the pair of clusters with the lexicographically smallest
// (smallest member id, smallest member id) pair.
ClusterTree complete_link(std::size_t n, std::span<const double> distances);

ClusterTree complete_link_cluster(std::span<const GaussianParams> segments);

// Leaf -> cluster index after undoing the top k-1 merges. Clusters are
// numbered by their smallest leaf.
std::vector<std::size_t> cut_tree(const ClusterTree& tree, std::size_t k);

// Leaf -> cluster index when the given nodes are taken as cluster roots
// (manual local thresholds). Leaves not under any root become singletons.
std::vector<std::size_t> cut_at_nodes(const ClusterTree& tree,
                                      std::span<const std::size_t> roots);

// Per-phase reference volatilities (average segment std per phase).
using PhaseVols = std::array<std::optional<double>, kPhaseCount>;

struct ReferenceVols {
  std::map<std::string, PhaseVols> rows;

  // Column means over all rows.
  PhaseVols generic() const;
  PhaseVols row_for(const std::string& sector) const;
};

ReferenceVols default_reference_vols();
// CSV: `sector,extremely_low,low,moderate,high,very_high,extremely_high`,
// with `-` for phases a sector does not have.
ReferenceVols parse_reference_vols(std::istream& in);
void write_reference_vols(std::ostream& out, const ReferenceVols& vols);

struct PhasedSegment {
  std::size_t start = 0;
  std::size_t end = 0;  // inclusive
  Timestamp start_ts = 0;
  Timestamp end_ts = 0;
  GaussianParams params;
  std::size_t cluster = 0;  // 0 = lowest volatility
  Phase phase = Phase::Moderate;

  bool operator==(const PhasedSegment&) const = default;
};

struct PhaseAssignment {
  std::string sector;
  std::uint64_t data_hash = 0;
  std::size_t k = 0;
  double threshold_lo = 0.0;
  double threshold_hi = 0.0;
  bool degenerate = false;
  bool manual = false;
  std::vector<PhasedSegment> segments;

  bool operator==(const PhaseAssignment&) const = default;
};

struct PhaseSelectionConfig {
  std::size_t k_min = 4;
  std::size_t k_max = 6;

  bool operator==(const PhaseSelectionConfig&) const = default;
};

struct KChoice {
  std::size_t k = 0;
  double threshold_lo = 0.0;  // merge height below which the cut stays at k
  double threshold_hi = 0.0;
  bool degenerate = false;
};

// Widest uniform-threshold stability range within [k_min, k_max]; ties go
// to the smaller k.
KChoice choose_k(const ClusterTree& tree, const PhaseSelectionConfig& config = {});

// Maps cluster volatilities (ascending) onto distinct, increasing phases so
// that the total |log(vol / reference)| mismatch is minimal.
std::vector<Phase> label_clusters(std::span<const double> ascending_vols,
                                  const PhaseVols& reference);

PhaseAssignment select_phases(const ClusterTree& tree, std::span<const Segment> segments,
                              const PhaseVols& reference,
                              const PhaseSelectionConfig& config = {});

// Same as select_phases but with explicit cluster roots instead of a
// uniform threshold.
PhaseAssignment assign_manual_phases(const ClusterTree& tree,
                                     std::span<const Segment> segments,
                                     std::span<const std::size_t> roots,
                                     const PhaseVols& reference);

PhaseAssignment cluster_segmentation(const Segmentation& seg, const ReferenceVols& vols,
                                     const PhaseSelectionConfig& config = {});

struct SectorWindow {
  Timestamp start_ts = 0;
  Timestamp end_ts = 0;
  Phase phase = Phase::Moderate;

  bool operator==(const SectorWindow&) const = default;
};

struct CorrespondingSegment {
  std::string id;
  Phase dominant_phase = Phase::Moderate;
  std::map<std::string, SectorWindow> windows;
  std::map<std::string, int> entry_ranks;  // sectors without a window absent
  std::vector<std::string> absent;

  bool operator==(const CorrespondingSegment&) const = default;
};

struct MatchConfig {
  std::size_t min_sector_coverage = 6;
  // 20 trading days spelled in calendar seconds so the rule does not depend
  // on weekday alignment.
  Timestamp window_seconds = 28 * 86400;

  bool operator==(const MatchConfig&) const = default;
};

// Greedy sweep over band entries: an event opens when enough sectors enter
// the same band within the matching window with a common overlap.
std::vector<CorrespondingSegment> match_corresponding(
    const std::map<std::string, PhaseAssignment>& assignments,
    const MatchConfig& config = {});

// Competition ranks ("1, 1, 3") of the per-sector start times.
std::map<std::string, int> rank_entries(const std::map<std::string, SectorWindow>& windows);

// Renames events by auto id (e.g. "PY1" -> "Y1"); unknown ids are kept.
void apply_names(std::vector<CorrespondingSegment>& segments,
                 const std::map<std::string, std::string>& names);

// Rows are event ids, columns sectors; absent sectors print as "-".
void write_rank_table(std::ostream& out, std::span<const CorrespondingSegment> segments,
                      std::span<const std::string> sectors);

// `sector,start_ts,end_ts,phase` with the phase color name.
void write_heatmap_csv(std::ostream& out, std::span<const PhaseAssignment> assignments);

}  // namespace regime_graph
