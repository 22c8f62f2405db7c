#pragma once

#include <string>

#include <json.hpp>

#include "ppcate/inference.hpp"
#include "ppcate/pipeline.hpp"
#include "ppcate/simulation.hpp"
#include "ppcate/tree.hpp"

namespace ppcate {

// All artifacts are JSON/CSV with deterministic field order and no
// environment-dependent content (no timestamps, no hostnames), so identical
// runs produce byte-identical files.
using Json = nlohmann::ordered_json;

Json score_model_to_json(const ScoreModel& model);
ScoreModel score_model_from_json(const Json& j);

Json tree_to_json(const CateTree& tree);
CateTree tree_from_json(const Json& j);

// Indented one-node-per-line rendering; internal nodes show the split,
// leaves the effect and member count.
std::string tree_to_text(const CateTree& tree);

Json pipeline_config_to_json(const PipelineConfig& cfg);

Json benchmark_report_to_json(const BenchmarkReport& report);
Json sweep_to_json(const ScenarioSpec& spec, const PipelineConfig& cfg,
                   int trials, const std::vector<KSweepPoint>& points);

// Long-format raster: header e,p,effect.
void write_grid_csv(const std::string& path, const EffectGrid& grid);

// Per-unit rows: index,estimate,lo,hi.
void write_intervals_csv(const std::string& path,
                         const Eigen::VectorXd& point_estimates,
                         const BootstrapResult& result);

// (unit, rank, neighbor, distance) rows for match debugging.
void write_matches_csv(const std::string& path, const MatchResult& match);

void write_json_file(const std::string& path, const Json& j);
Json read_json_file(const std::string& path);

struct BundleOptions {
  bool dump_matches = false;
  int grid_cells = 40;  // per axis
};

// Writes score_model.json, tree.json, tree.txt, grid.csv and manifest.json
// (plus matches.csv on request) into `dir`, creating it if needed. The
// manifest records the resolved config, the seed and the artifact version.
void write_bundle(const std::string& dir, const CateModel& model,
                  std::uint64_t seed, const BundleOptions& opts = {});

// Restores the parts of a fit needed for prediction (score models + tree).
CateModel read_bundle(const std::string& dir);

}  // namespace ppcate
