#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include "regime_graph/config.hpp"
#include "regime_graph/correlation.hpp"
#include "regime_graph/error.hpp"
#include "regime_graph/market_data.hpp"
#include "regime_graph/market_graphs.hpp"
#include "regime_graph/phase_clustering.hpp"
#include "regime_graph/segmentation.hpp"
#include "regime_graph/serialization.hpp"
#include "regime_graph/synthetic.hpp"

namespace fs = std::filesystem;

namespace regime_graph::cli {

unsigned thread_cap() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("REGIME_GRAPH_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return hw;
}

namespace {

// Runs f(i) for i in [0, n) on up to thread_cap() workers. Results must be
// written by index so the outcome does not depend on scheduling; the first
// failure by index is rethrown.
template <typename F>
void parallel_for(std::size_t n, F&& f) {
  std::size_t workers = std::min<std::size_t>(n, thread_cap());
  std::vector<std::exception_ptr> errors(n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < n;) {
        try {
          f(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DomainError(ErrorCode::IoError, "cannot write " + path);
  f << text;
  if (!f) throw DomainError(ErrorCode::IoError, "cannot write " + path);
}

bool is_json_path(const std::string& path) { return fs::path(path).extension() == ".json"; }

std::vector<ReturnSeries> load_returns(const std::string& path, const PipelineConfig& config) {
  if (is_json_path(path)) {
    return read_envelope(path, "returns").payload.get<std::vector<ReturnSeries>>();
  }
  std::istringstream in(read_text_file(path));
  return parse_returns_csv(in, config.session);
}

std::vector<ReturnSeries> ingest_observations(const std::string& path,
                                              const PipelineConfig& config, std::ostream& err) {
  auto obs = read_observations_csv(path);
  auto grouped = group_by_sector(obs);
  std::vector<ReturnSeries> out;
  for (const auto& [sector, list] : grouped) {
    auto bars = resample(list, config.interval_seconds, config.session);
    for (const auto& w : bars.warnings) err << "warning: " << sector << ": " << w << "\n";
    out.push_back(log_returns(bars, config.overnight));
  }
  return out;
}

CorrelationMatrix load_matrix(const std::string& path) {
  if (is_json_path(path)) {
    auto env = read_envelope(path, "matrix");
    const auto& p = env.payload;
    return (p.contains("matrix") ? p.at("matrix") : p).get<CorrelationMatrix>();
  }
  std::istringstream in(read_text_file(path));
  return parse_matrix_csv(in);
}

CorrelationGraph load_graph(const std::string& path) {
  return read_envelope(path, "graph").payload.get<CorrelationGraph>();
}

std::vector<CorrespondingSegment> load_events(const std::string& path) {
  return read_envelope(path, "corresponding").payload.get<std::vector<CorrespondingSegment>>();
}

const CorrespondingSegment& pick_event(const std::vector<CorrespondingSegment>& events,
                                       const std::string& id) {
  if (events.empty()) throw DomainError(ErrorCode::EmptyInput, "no corresponding segments");
  if (id.empty()) return events.front();
  for (const auto& e : events) {
    if (e.id == id) return e;
  }
  throw DomainError(ErrorCode::InvalidArgument, "no corresponding segment '" + id + "'");
}

std::map<std::string, std::string> load_names(const std::string& path) {
  std::map<std::string, std::string> names;
  if (path.empty()) return names;
  std::istringstream in(read_text_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw DomainError(ErrorCode::ParseError, "names file: expected auto_id,name");
    }
    auto key = line.substr(0, comma);
    auto value = line.substr(comma + 1);
    if (!value.empty() && value.back() == '\r') value.pop_back();
    if (key == "auto_id") continue;  // header
    names[key] = value;
  }
  return names;
}

std::vector<Segmentation> segment_all(const std::vector<ReturnSeries>& series,
                                      const PipelineConfig& config) {
  std::vector<Segmentation> out(series.size());
  parallel_for(series.size(),
               [&](std::size_t i) { out[i] = segment_series(series[i], config.segmentation); });
  return out;
}

std::vector<PhaseAssignment> cluster_all(const std::vector<Segmentation>& segs,
                                         const PipelineConfig& config) {
  auto vols = load_reference_vols(config);
  std::vector<PhaseAssignment> out(segs.size());
  parallel_for(segs.size(), [&](std::size_t i) {
    out[i] = cluster_segmentation(segs[i], vols, config.phases);
  });
  return out;
}

std::map<std::string, PhaseAssignment> by_sector(const std::vector<PhaseAssignment>& list) {
  std::map<std::string, PhaseAssignment> out;
  for (const auto& a : list) out[a.sector] = a;
  return out;
}

std::vector<std::string> sector_list(const std::vector<PhaseAssignment>& list) {
  std::vector<std::string> out;
  for (const auto& a : list) out.push_back(a.sector);
  std::sort(out.begin(), out.end());
  return out;
}

json probe_json(const ProbeComparison& p) {
  return json{{"interval", p.interval},
              {"sample_count", p.sample_count},
              {"max_positive", {{"a", p.max_positive.a}, {"b", p.max_positive.b},
                                {"value", p.max_positive.value}}},
              {"max_negative", {{"a", p.max_negative.a}, {"b", p.max_negative.b},
                                {"value", p.max_negative.value}}}};
}

json robustness_json(const RobustnessReport& r) {
  return json{{"shorter", r.shorter}, {"longer", r.longer},
              {"shrunk", probe_json(r.shrunk)}, {"grown", probe_json(r.grown)}};
}

std::map<std::string, int> ranks_for(const std::string& events_path, const std::string& id) {
  if (events_path.empty()) return {};
  auto events = load_events(events_path);
  return pick_event(events, id).entry_ranks;
}

std::string dot_text(const CorrelationGraph& g, const DotOptions& options) {
  std::ostringstream out;
  write_dot(out, g, options);
  return out.str();
}

bool is_error(const DomainError& e, std::initializer_list<ErrorCode> codes) {
  return std::find(codes.begin(), codes.end(), e.code()) != codes.end();
}

// Everything after returns: segmentation, phases, events, and the matrix and
// graphs of the whole period and of each event interval.
json run_report(const std::vector<ReturnSeries>& series, const PipelineConfig& config,
                const std::map<std::string, std::string>& names, const fs::path& dir,
                std::ostream& err) {
  fs::create_directories(dir);
  auto segs = segment_all(series, config);
  auto phases = cluster_all(segs, config);
  auto assignments = by_sector(phases);
  auto events = match_corresponding(assignments, config.match_config());
  apply_names(events, names);
  auto sectors = sector_list(phases);

  {
    std::ostringstream heat, ranks;
    write_heatmap_csv(heat, phases);
    write_rank_table(ranks, events, sectors);
    emit((dir / "heatmap.csv").string(), heat.str(), err);
    emit((dir / "ranks.csv").string(), ranks.str(), err);
  }

  json notes = json::array();
  auto graphs_for = [&](const CorrelationMatrix& c, const std::string& stem,
                        const std::map<std::string, int>& node_ranks) {
    json item;
    item["matrix"] = c;
    item["averages"] = sector_averages(c);
    auto tree = mst(c);
    item["mst"] = tree;
    item["topology"] = topology(tree, config.topology);
    DotOptions opt;
    opt.title = stem + " MST";
    opt.node_ranks = node_ranks;
    emit((dir / (stem + "_mst.dot")).string(), dot_text(tree, opt), err);
    if (c.size() >= 3) {
      auto planar = pmfg(c);
      item["pmfg"] = planar;
      opt.title = stem + " PMFG";
      opt.highlight_tree = tree;
      emit((dir / (stem + "_pmfg.dot")).string(), dot_text(planar, opt), err);
    } else {
      item["pmfg"] = nullptr;
    }
    return std::pair{item, tree};
  };

  json whole = nullptr;
  try {
    whole = graphs_for(cross_correlation(series, config.overnight), "whole", {}).first;
  } catch (const DomainError& e) {
    if (!is_error(e, {ErrorCode::InsufficientOverlap, ErrorCode::ZeroVarianceSeries})) throw;
    notes.push_back("whole period: " + std::string(e.name()) + ": " + e.what());
  }

  json intervals = json::array();
  std::optional<CorrelationGraph> previous;
  std::string previous_id;
  for (const auto& ev : events) {
    json item{{"event", ev.id}};
    try {
      auto sel = select_interval(assignments, ev, config.min_sector_coverage);
      item["selection"] = sel;
      auto c = cross_correlation(series, sel.interval, config.overnight);
      auto [graphs, tree] = graphs_for(c, ev.id, ev.entry_ranks);
      item.update(graphs);
      try {
        item["robustness"] = robustness_json(robustness_probe(
            series, sel.interval, config.probe_days, config.probe_days, config.session,
            config.overnight));
      } catch (const DomainError& e) {
        if (!is_error(e, {ErrorCode::InsufficientOverlap, ErrorCode::ZeroVarianceSeries})) throw;
        item["robustness"] = nullptr;
      }
      if (previous) {
        item["diff_from_previous"] = {{"from", previous_id}, {"diff", diff(*previous, tree)}};
      }
      previous = tree;
      previous_id = ev.id;
    } catch (const DomainError& e) {
      if (!is_error(e, {ErrorCode::NoFeasibleInterval, ErrorCode::InsufficientOverlap,
                        ErrorCode::ZeroVarianceSeries})) {
        throw;
      }
      notes.push_back(ev.id + ": " + std::string(e.name()) + ": " + e.what());
    }
    intervals.push_back(std::move(item));
  }

  json payload{{"segmentations", segs},
               {"phases", phases},
               {"corresponding", events},
               {"whole_period", whole},
               {"intervals", std::move(intervals)},
               {"notes", std::move(notes)}};
  return make_envelope("report", config, std::move(payload));
}

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;

  std::string input, output, csv, extra;
  std::string phases, events, event, names, ranks, heatmap, manual, trees;
  std::string start, end, matrix, dot, title, truth, prices, output_dir;
  std::string diff_a, diff_b;
  std::size_t sectors = 10;
  std::optional<std::uint64_t> seed;
  bool probe = false;
};

PipelineConfig resolve_config(const Options& o) {
  PipelineConfig config = o.config_path.empty() ? PipelineConfig{} : read_config(o.config_path);
  for (const auto& kv : o.overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw CLI::ValidationError("--set", "expected key=value, got '" + kv + "'");
    }
    set_config_value(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.seed) config.seed = *o.seed;
  validate(config);
  return config;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Regime segmentation, volatility phases and sector correlation graphs",
               "regime-graph"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "regime-graph 0.1.0");
  Options o;
  app.add_option("--config", o.config_path, "key = value configuration file")
      ->check(CLI::ExistingFile);
  app.add_option("--set", o.overrides, "override one config key, key=value");

  auto* ingest = app.add_subcommand("ingest", "price CSV -> return series");
  ingest->add_option("--input,-i", o.input, "sector,timestamp,price CSV (.gz ok)")->required();
  ingest->add_option("--output,-o", o.output, "returns JSON (default stdout)");
  ingest->add_option("--csv", o.csv, "also write sector,timestamp,return CSV");

  auto* synth = app.add_subcommand("synth", "generate synthetic regime-switching returns");
  synth->add_option("--sectors", o.sectors, "number of sectors")->check(CLI::Range(1, 64));
  synth->add_option("--seed", o.seed, "RNG seed");
  synth->add_option("--output,-o", o.output, "returns JSON (default stdout)");
  synth->add_option("--truth", o.truth, "ground-truth manifest JSON");
  synth->add_option("--prices", o.prices, "price CSV implied by the returns");
  synth->add_option("--csv", o.csv, "returns CSV");

  auto* segment = app.add_subcommand("segment", "returns -> segmentations");
  segment->add_option("--input,-i", o.input, "returns JSON or CSV")->required();
  segment->add_option("--output,-o", o.output, "segmentation JSON (default stdout)");

  auto* cluster = app.add_subcommand("cluster", "segmentations -> volatility phases");
  cluster->add_option("--input,-i", o.input, "segmentation JSON")->required();
  cluster->add_option("--output,-o", o.output, "phase JSON (default stdout)");
  cluster->add_option("--heatmap", o.heatmap, "sector,start_ts,end_ts,phase CSV");
  cluster->add_option("--trees", o.trees, "cluster trees JSON");
  cluster->add_option("--manual", o.manual, "JSON {sector: [root node ids]} overriding k");

  auto* match = app.add_subcommand("match", "phases -> corresponding segments");
  match->add_option("--input,-i", o.input, "phase JSON")->required();
  match->add_option("--output,-o", o.output, "corresponding segments JSON (default stdout)");
  match->add_option("--names", o.names, "auto_id,name CSV");
  match->add_option("--ranks", o.ranks, "entry rank table CSV");

  auto* correlate = app.add_subcommand("correlate", "returns -> correlation matrix");
  correlate->add_option("--returns,--input,-i", o.input, "returns JSON or CSV")->required();
  correlate->add_option("--output,-o", o.output, "matrix JSON (default stdout)");
  correlate->add_option("--csv", o.csv, "matrix CSV");
  correlate->add_option("--phases", o.phases, "phase JSON, for interval selection");
  correlate->add_option("--events", o.events, "corresponding segments JSON");
  correlate->add_option("--event", o.event, "corresponding segment id (default: first)");
  correlate->add_option("--start", o.start, "interval start (epoch or ISO-8601)");
  correlate->add_option("--end", o.end, "interval end (epoch or ISO-8601)");
  correlate->add_flag("--probe", o.probe, "shrink/grow the interval by probe_days");

  auto add_graph_options = [&](CLI::App* sub) {
    sub->add_option("--matrix,-m", o.matrix, "matrix CSV or JSON")->required();
    sub->add_option("--output,-o", o.output, "graph JSON (default stdout)");
    sub->add_option("--dot", o.dot, "DOT file");
    sub->add_option("--title", o.title, "DOT graph title");
    sub->add_option("--events", o.events, "corresponding segments JSON for node ranks");
    sub->add_option("--event", o.event, "corresponding segment id");
  };
  auto* mst_cmd = app.add_subcommand("mst", "matrix -> minimum spanning tree");
  add_graph_options(mst_cmd);
  auto* pmfg_cmd = app.add_subcommand("pmfg", "matrix -> planar maximally filtered graph");
  add_graph_options(pmfg_cmd);

  auto* topo = app.add_subcommand("topology", "tree metrics and star/chain class");
  topo->add_option("--input,-i", o.input, "graph JSON")->required();
  topo->add_option("--output,-o", o.output, "metrics JSON (default stdout)");

  auto* diff_cmd = app.add_subcommand("diff", "bonds broken and formed between two trees");
  diff_cmd->add_option("a", o.diff_a, "earlier graph JSON")->required();
  diff_cmd->add_option("b", o.diff_b, "later graph JSON")->required();
  diff_cmd->add_option("--output,-o", o.output, "diff JSON (default stdout)");

  auto* report = app.add_subcommand("report", "full pipeline with one JSON bundle and DOT files");
  report->add_option("--input,-i", o.input, "returns JSON, or price CSV")->required();
  report->add_option("--output-dir,-d", o.output_dir, "directory for report.json and DOT files")
      ->required();
  report->add_option("--names", o.names, "auto_id,name CSV");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  PipelineConfig config;
  try {
    app.parse(reversed);
    config = resolve_config(o);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << app.version() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    for (auto* sub : app.get_subcommands()) err << sub->help();
    return 2;
  } catch (const DomainError& e) {
    err << "usage error: " << e.name() << ": " << e.what() << "\n";
    return 2;
  }

  err << "# resolved config\n" << config_text(config);

  try {
    if (ingest->parsed()) {
      auto series = ingest_observations(o.input, config, err);
      emit(o.output, dump(make_envelope("returns", config, series)), out);
      if (!o.csv.empty()) {
        std::ostringstream s;
        write_returns_csv(s, series);
        emit(o.csv, s.str(), out);
      }
    } else if (synth->parsed()) {
      auto data = generate_synthetic(default_scenario(o.sectors, config.seed));
      emit(o.output, dump(make_envelope("returns", config, data.series)), out);
      if (!o.truth.empty()) {
        emit(o.truth, dump(make_envelope("truth", config, data.truth)), out);
      }
      if (!o.prices.empty()) {
        std::ostringstream s;
        write_observations_csv(s, synthetic_prices(data));
        emit(o.prices, s.str(), out);
      }
      if (!o.csv.empty()) {
        std::ostringstream s;
        write_returns_csv(s, data.series);
        emit(o.csv, s.str(), out);
      }
    } else if (segment->parsed()) {
      auto segs = segment_all(load_returns(o.input, config), config);
      emit(o.output, dump(make_envelope("segmentation", config, segs)), out);
    } else if (cluster->parsed()) {
      auto segs =
          read_envelope(o.input, "segmentation").payload.get<std::vector<Segmentation>>();
      auto phases = cluster_all(segs, config);
      if (!o.manual.empty() || !o.trees.empty()) {
        auto vols = load_reference_vols(config);
        json manual = o.manual.empty() ? json::object() : json::parse(read_text_file(o.manual));
        json trees = json::object();
        for (std::size_t i = 0; i < segs.size(); ++i) {
          std::vector<GaussianParams> params;
          for (const auto& s : segs[i].segments) params.push_back(s.params);
          if (params.size() < 2) continue;
          auto tree = complete_link_cluster(params);
          trees[segs[i].sector] = tree;
          if (manual.contains(segs[i].sector)) {
            auto roots = manual.at(segs[i].sector).get<std::vector<std::size_t>>();
            auto a = assign_manual_phases(tree, segs[i].segments, roots,
                                          vols.row_for(segs[i].sector));
            a.sector = segs[i].sector;
            a.data_hash = segs[i].data_hash;
            phases[i] = a;
          }
        }
        if (!o.trees.empty()) emit(o.trees, dump(make_envelope("trees", config, trees)), out);
      }
      emit(o.output, dump(make_envelope("phases", config, phases)), out);
      if (!o.heatmap.empty()) {
        std::ostringstream s;
        write_heatmap_csv(s, phases);
        emit(o.heatmap, s.str(), out);
      }
    } else if (match->parsed()) {
      auto phases = read_envelope(o.input, "phases").payload.get<std::vector<PhaseAssignment>>();
      auto events = match_corresponding(by_sector(phases), config.match_config());
      apply_names(events, load_names(o.names));
      emit(o.output, dump(make_envelope("corresponding", config, events)), out);
      if (!o.ranks.empty()) {
        std::ostringstream s;
        auto sectors = sector_list(phases);
        write_rank_table(s, events, sectors);
        emit(o.ranks, s.str(), out);
      }
    } else if (correlate->parsed()) {
      auto series = load_returns(o.input, config);
      json payload;
      Interval interval{std::numeric_limits<Timestamp>::min(),
                        std::numeric_limits<Timestamp>::max()};
      payload["selection"] = nullptr;
      if (!o.events.empty()) {
        if (o.phases.empty()) throw DomainError(ErrorCode::InvalidArgument, "--events needs --phases");
        auto phases =
            read_envelope(o.phases, "phases").payload.get<std::vector<PhaseAssignment>>();
        auto events = load_events(o.events);
        auto sel = select_interval(by_sector(phases), pick_event(events, o.event),
                                   config.min_sector_coverage);
        payload["selection"] = sel;
        interval = sel.interval;
      }
      if (!o.start.empty()) interval.start = parse_timestamp(o.start);
      if (!o.end.empty()) interval.end = parse_timestamp(o.end);
      auto c = cross_correlation(series, interval, config.overnight);
      payload["matrix"] = c;
      payload["averages"] = sector_averages(c);
      payload["robustness"] = nullptr;
      if (o.probe) {
        payload["robustness"] = robustness_json(robustness_probe(
            series, interval, config.probe_days, config.probe_days, config.session,
            config.overnight));
      }
      emit(o.output, dump(make_envelope("matrix", config, payload)), out);
      if (!o.csv.empty()) {
        std::ostringstream s;
        write_matrix_csv(s, c);
        emit(o.csv, s.str(), out);
      }
    } else if (mst_cmd->parsed() || pmfg_cmd->parsed()) {
      auto c = load_matrix(o.matrix);
      auto tree = mst(c);
      bool planar = pmfg_cmd->parsed();
      auto g = planar ? pmfg(c) : tree;
      emit(o.output, dump(make_envelope("graph", config, g)), out);
      if (!o.dot.empty()) {
        DotOptions opt;
        opt.title = o.title;
        opt.node_ranks = ranks_for(o.events, o.event);
        if (planar) opt.highlight_tree = tree;
        emit(o.dot, dot_text(g, opt), out);
      }
    } else if (topo->parsed()) {
      auto g = load_graph(o.input);
      json payload = topology(g, config.topology);
      payload["nodes"] = g.nodes;
      emit(o.output, dump(make_envelope("topology", config, payload)), out);
    } else if (diff_cmd->parsed()) {
      auto d = diff(load_graph(o.diff_a), load_graph(o.diff_b));
      emit(o.output, dump(make_envelope("diff", config, d)), out);
    } else if (report->parsed()) {
      auto series = is_json_path(o.input) ? load_returns(o.input, config)
                                          : ingest_observations(o.input, config, err);
      auto bundle = run_report(series, config, load_names(o.names), o.output_dir, err);
      emit((fs::path(o.output_dir) / "report.json").string(), dump(bundle), out);
    }
  } catch (const DomainError& e) {
    err << "error: " << e.name() << ": " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    err << "error: ParseError: " << e.what() << "\n";
    return 1;
  } catch (const fs::filesystem_error& e) {
    err << "error: IoError: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace regime_graph::cli
