#include "ppcate/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ppcate/csv.hpp"
#include "ppcate/errors.hpp"
#include "ppcate/version.hpp"

namespace ppcate {

namespace {

Json vec_to_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vec_from_json(const Json& j, const char* what) {
  if (!j.is_array()) throw ValidationError(std::string(what) + ": not an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  Eigen::Index i = 0;
  for (const auto& x : j) {
    if (!x.is_number()) throw ValidationError(std::string(what) + ": non-numeric entry");
    v[i++] = x.get<double>();
  }
  return v;
}

std::string penalty_str(PenaltyMode m) {
  return m == PenaltyMode::lasso ? "lasso" : "none";
}

std::string axes_str(AxisMode a) {
  switch (a) {
    case AxisMode::both: return "both";
    case AxisMode::propensity_only: return "propensity";
    case AxisMode::prognostic_only: return "prognostic";
  }
  return "both";
}

AxisMode axes_from_str(const std::string& s) {
  if (s == "both") return AxisMode::both;
  if (s == "propensity") return AxisMode::propensity_only;
  if (s == "prognostic") return AxisMode::prognostic_only;
  throw ValidationError("unknown axes mode '" + s + "'");
}

Json linear_model_to_json(const LinearScoreModel& m) {
  Json j;
  j["intercept"] = m.intercept;
  j["coef"] = vec_to_json(m.coef);
  j["penalty"] = penalty_str(m.penalty);
  j["lambda"] = m.lambda;
  Json info;
  info["converged"] = m.info.converged;
  info["iterations"] = m.info.iterations;
  info["separation"] = m.info.separation;
  info["ridge_stabilized"] = m.info.ridge_stabilized;
  info["objective_path"] = m.info.objective_path;
  j["info"] = info;
  if (!m.cv.lambdas.empty()) {
    Json cv;
    cv["lambdas"] = m.cv.lambdas;
    cv["cv_error"] = m.cv.cv_error;
    cv["cv_se"] = m.cv.cv_se;
    cv["nonzero"] = m.cv.nonzero;
    cv["selected"] = m.cv.selected;
    j["cv"] = cv;
  }
  return j;
}

LinearScoreModel linear_model_from_json(const Json& j, const char* what) {
  LinearScoreModel m;
  try {
    m.intercept = j.at("intercept").get<double>();
    m.coef = vec_from_json(j.at("coef"), what);
    const std::string pen = j.at("penalty").get<std::string>();
    if (pen != "none" && pen != "lasso")
      throw ValidationError(std::string(what) + ": unknown penalty");
    m.penalty = pen == "lasso" ? PenaltyMode::lasso : PenaltyMode::none;
    m.lambda = j.at("lambda").get<double>();
    const Json& info = j.at("info");
    m.info.converged = info.at("converged").get<bool>();
    m.info.iterations = info.at("iterations").get<int>();
    m.info.separation = info.at("separation").get<bool>();
    m.info.ridge_stabilized = info.at("ridge_stabilized").get<bool>();
    m.info.objective_path =
        info.at("objective_path").get<std::vector<double>>();
    if (j.contains("cv")) {
      const Json& cv = j.at("cv");
      m.cv.lambdas = cv.at("lambdas").get<std::vector<double>>();
      m.cv.cv_error = cv.at("cv_error").get<std::vector<double>>();
      m.cv.cv_se = cv.at("cv_se").get<std::vector<double>>();
      m.cv.nonzero = cv.at("nonzero").get<std::vector<int>>();
      m.cv.selected = cv.at("selected").get<int>();
    }
  } catch (const Json::exception& e) {
    throw ValidationError(std::string(what) + ": " + e.what());
  }
  return m;
}

Json scenario_spec_to_json(const ScenarioSpec& s) {
  Json j;
  j["id"] = s.id;
  j["n"] = s.n;
  j["d"] = s.d;
  j["seed"] = s.seed;
  j["e_threshold"] = s.e_threshold;
  j["p_threshold"] = s.p_threshold;
  j["fix_coefficients"] = s.fix_coefficients;
  if (s.fix_coefficients) j["coef_seed"] = s.coef_seed;
  return j;
}

Json method_map(const std::vector<Method>& methods,
                const std::vector<double>& values) {
  Json j;
  for (std::size_t m = 0; m < methods.size() && m < values.size(); ++m)
    j[method_name(methods[m])] = values[m];
  return j;
}

void text_walk(const CateTree& tree, int id, int depth, std::ostream& os) {
  const TreeNode& nd = tree.nodes[static_cast<std::size_t>(id)];
  for (int i = 0; i < depth; ++i) os << "  ";
  if (nd.is_leaf()) {
    os << "leaf effect=" << format_double(nd.value) << " (n=" << nd.n << ")\n";
    return;
  }
  os << "split " << (nd.axis == 0 ? "e_hat" : "p_hat")
     << " <= " << format_double(nd.threshold) << " (n=" << nd.n << ")\n";
  text_walk(tree, nd.left, depth + 1, os);
  text_walk(tree, nd.right, depth + 1, os);
}

}  // namespace

Json score_model_to_json(const ScoreModel& model) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["d"] = model.d;
  j["propensity"] = linear_model_to_json(model.propensity);
  j["prognostic"] = linear_model_to_json(model.prognostic);
  return j;
}

ScoreModel score_model_from_json(const Json& j) {
  ScoreModel m;
  try {
    if (j.at("schema_version").get<int>() != kSchemaVersion)
      throw ValidationError("score model: unsupported schema_version");
    m.d = j.at("d").get<int>();
    m.propensity = linear_model_from_json(j.at("propensity"), "propensity");
    m.prognostic = linear_model_from_json(j.at("prognostic"), "prognostic");
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("score model: ") + e.what());
  }
  if (m.propensity.coef.size() != m.d || m.prognostic.coef.size() != m.d)
    throw ValidationError("score model: coefficient length differs from d");
  return m;
}

Json tree_to_json(const CateTree& tree) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  Json cfg;
  cfg["min_node_size"] = tree.config.min_node_size;
  cfg["cp_floor"] = tree.config.cp_floor;
  cfg["axes"] = axes_str(tree.config.axes);
  j["config"] = cfg;
  j["root_sse"] = tree.root_sse;
  j["cp_selected"] = tree.cp_selected;
  j["complexity_path"] = tree.complexity_path;
  j["path_leaves"] = tree.path_leaves;
  j["cv_error"] = tree.cv_error;
  j["cv_se"] = tree.cv_se;
  Json nodes = Json::array();
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const TreeNode& nd = tree.nodes[i];
    Json n;
    n["id"] = i;
    if (nd.is_leaf())
      n["axis"] = nullptr;
    else
      n["axis"] = nd.axis == 0 ? "e" : "p";
    n["threshold"] = nd.threshold;
    n["value"] = nd.value;
    n["sse"] = nd.sse;
    n["n"] = nd.n;
    n["left"] = nd.left;
    n["right"] = nd.right;
    nodes.push_back(n);
  }
  j["nodes"] = nodes;
  return j;
}

CateTree tree_from_json(const Json& j) {
  CateTree tree;
  try {
    if (j.at("schema_version").get<int>() != kSchemaVersion)
      throw ValidationError("tree: unsupported schema_version");
    const Json& cfg = j.at("config");
    tree.config.min_node_size = cfg.at("min_node_size").get<int>();
    tree.config.cp_floor = cfg.at("cp_floor").get<double>();
    tree.config.axes = axes_from_str(cfg.at("axes").get<std::string>());
    tree.root_sse = j.at("root_sse").get<double>();
    tree.cp_selected = j.at("cp_selected").get<double>();
    tree.complexity_path =
        j.at("complexity_path").get<std::vector<double>>();
    tree.path_leaves = j.at("path_leaves").get<std::vector<int>>();
    tree.cv_error = j.at("cv_error").get<std::vector<double>>();
    tree.cv_se = j.at("cv_se").get<std::vector<double>>();
    const Json& nodes = j.at("nodes");
    if (!nodes.is_array() || nodes.empty())
      throw ValidationError("tree: empty node list");
    const int count = static_cast<int>(nodes.size());
    tree.nodes.resize(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      const Json& n = nodes.at(static_cast<std::size_t>(i));
      TreeNode& nd = tree.nodes[static_cast<std::size_t>(i)];
      const Json& axis = n.at("axis");
      if (axis.is_null())
        nd.axis = -1;
      else if (axis.get<std::string>() == "e")
        nd.axis = 0;
      else if (axis.get<std::string>() == "p")
        nd.axis = 1;
      else
        throw ValidationError("tree: unknown axis");
      nd.threshold = n.at("threshold").get<double>();
      nd.value = n.at("value").get<double>();
      nd.sse = n.at("sse").get<double>();
      nd.n = n.at("n").get<int>();
      nd.left = n.at("left").get<int>();
      nd.right = n.at("right").get<int>();
      const bool has_kids = nd.left >= 0 || nd.right >= 0;
      if (nd.is_leaf() && has_kids)
        throw ValidationError("tree: leaf with children");
      if (!nd.is_leaf() &&
          (nd.left < 0 || nd.left >= count || nd.right < 0 ||
           nd.right >= count))
        throw ValidationError("tree: child index out of range");
    }
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("tree: ") + e.what());
  }
  return tree;
}

std::string tree_to_text(const CateTree& tree) {
  if (tree.nodes.empty()) throw NumericError("tree has not been fit");
  std::ostringstream os;
  text_walk(tree, 0, 0, os);
  return os.str();
}

Json pipeline_config_to_json(const PipelineConfig& cfg) {
  Json j;
  j["k"] = cfg.k == 0 ? Json("auto") : Json(cfg.k);
  j["min_node_size"] = cfg.min_node_size;
  j["cp_floor"] = cfg.cp_floor;
  j["cp_rule"] = cfg.cp_rule == CpRule::one_se ? "one-se" : "min-cv";
  switch (cfg.penalty) {
    case PenaltyChoice::automatic: j["penalty"] = "auto"; break;
    case PenaltyChoice::none: j["penalty"] = "none"; break;
    case PenaltyChoice::lasso: j["penalty"] = "lasso"; break;
  }
  j["folds"] = cfg.folds;
  j["axes"] = axes_str(cfg.axes);
  j["standardize_prognostic"] = cfg.standardize_p;
  j["overlap_eps"] = cfg.overlap_eps;
  j["lambda_grid_size"] = cfg.lambda_grid_size;
  j["lambda_min_ratio"] = cfg.lambda_min_ratio;
  return j;
}

Json benchmark_report_to_json(const BenchmarkReport& report) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["scenario"] = scenario_spec_to_json(report.spec);
  j["config"] = pipeline_config_to_json(report.config);
  Json methods = Json::array();
  for (const Method m : report.methods) methods.push_back(method_name(m));
  j["methods"] = methods;
  j["trials"] = report.trials;
  j["bootstrap_B"] = report.bootstrap_B;
  if (report.bootstrap_B > 0) j["level"] = report.level;
  j["mean_mse"] = method_map(report.methods, report.mean_mse);
  if (!report.mean_coverage.empty())
    j["mean_coverage"] = method_map(report.methods, report.mean_coverage);
  j["runtime_seconds"] = method_map(report.methods, report.runtime_seconds);
  Json trials = Json::array();
  for (const TrialRecord& rec : report.trial_records) {
    Json t;
    t["seed"] = rec.seed;
    t["region_mass"] = rec.region_mass;
    t["failed"] = rec.failed;
    if (rec.failed) t["error"] = rec.error;
    t["mse"] = rec.mse;
    if (!rec.coverage.empty()) t["coverage"] = rec.coverage;
    t["seconds"] = rec.seconds;
    trials.push_back(t);
  }
  j["trial_records"] = trials;
  return j;
}

Json sweep_to_json(const ScenarioSpec& spec, const PipelineConfig& cfg,
                   int trials, const std::vector<KSweepPoint>& points) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["scenario"] = scenario_spec_to_json(spec);
  j["config"] = pipeline_config_to_json(cfg);
  j["trials"] = trials;
  Json results = Json::array();
  for (const KSweepPoint& p : points) {
    Json r;
    r["k"] = p.k;
    r["mean_mse"] = p.mean_mse;
    r["trial_mse"] = p.trial_mse;
    results.push_back(r);
  }
  j["results"] = results;
  return j;
}

void write_grid_csv(const std::string& path, const EffectGrid& grid) {
  std::ofstream os(path);
  if (!os) throw ValidationError("cannot write '" + path + "'");
  os << "e,p,effect\n";
  for (Eigen::Index i = 0; i < grid.e_centers.size(); ++i)
    for (Eigen::Index jj = 0; jj < grid.p_centers.size(); ++jj)
      os << format_double(grid.e_centers[i]) << ','
         << format_double(grid.p_centers[jj]) << ','
         << format_double(grid.effect(i, jj)) << '\n';
  if (!os) throw ValidationError("failed writing '" + path + "'");
}

void write_intervals_csv(const std::string& path,
                         const Eigen::VectorXd& point_estimates,
                         const BootstrapResult& result) {
  if (point_estimates.size() != result.lo.size())
    throw ValidationError("point estimates do not match the intervals");
  std::ofstream os(path);
  if (!os) throw ValidationError("cannot write '" + path + "'");
  os << "index,estimate,lo,hi\n";
  for (Eigen::Index i = 0; i < point_estimates.size(); ++i)
    os << i << ',' << format_double(point_estimates[i]) << ','
       << format_double(result.lo[i]) << ',' << format_double(result.hi[i])
       << '\n';
  if (!os) throw ValidationError("failed writing '" + path + "'");
}

void write_matches_csv(const std::string& path, const MatchResult& match) {
  std::ofstream os(path);
  if (!os) throw ValidationError("cannot write '" + path + "'");
  os << "unit,rank,neighbor,distance\n";
  for (std::size_t i = 0; i < match.neighbor_sets.size(); ++i)
    for (std::size_t r = 0; r < match.neighbor_sets[i].size(); ++r)
      os << i << ',' << r << ',' << match.neighbor_sets[i][r] << ','
         << format_double(match.distances[i][r]) << '\n';
  if (!os) throw ValidationError("failed writing '" + path + "'");
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream os(path);
  if (!os) throw ValidationError("cannot write '" + path + "'");
  os << j.dump(2) << '\n';
  if (!os) throw ValidationError("failed writing '" + path + "'");
}

Json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot read '" + path + "'");
  try {
    return Json::parse(is);
  } catch (const Json::exception& e) {
    throw ValidationError("invalid JSON in '" + path + "': " + e.what());
  }
}

void write_bundle(const std::string& dir, const CateModel& model,
                  std::uint64_t seed, const BundleOptions& opts) {
  if (model.tree.nodes.empty()) throw NumericError("model has not been fit");
  if (model.train_scores.n() == 0)
    throw NumericError(
        "model carries no training scores (a restored bundle cannot be "
        "re-saved)");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create directory '" + dir + "'");
  const auto at = [&dir](const char* name) {
    return (std::filesystem::path(dir) / name).string();
  };

  write_json_file(at("score_model.json"), score_model_to_json(model.scores));
  write_json_file(at("tree.json"), tree_to_json(model.tree));
  {
    std::ofstream os(at("tree.txt"));
    if (!os) throw ValidationError("cannot write tree.txt");
    os << tree_to_text(model.tree);
  }

  double p_lo = model.train_scores.p_hat.minCoeff();
  double p_hi = model.train_scores.p_hat.maxCoeff();
  if (p_hi - p_lo < 1e-9) {
    p_lo -= 0.5;
    p_hi += 0.5;
  }
  write_grid_csv(at("grid.csv"),
                 export_grid(model.tree, 0.0, 1.0, p_lo, p_hi,
                             opts.grid_cells, opts.grid_cells));
  if (opts.dump_matches) write_matches_csv(at("matches.csv"), model.match);

  Json manifest;
  manifest["schema_version"] = kSchemaVersion;
  Json tool;
  tool["name"] = "ppcate";
  tool["version"] = kVersion;
  manifest["tool"] = tool;
  manifest["seed"] = seed;
  manifest["config"] = pipeline_config_to_json(model.config);
  Json data;
  data["n"] = model.train_scores.e_hat.size();
  data["d"] = model.scores.d;
  manifest["data"] = data;
  Json fit;
  fit["k_used"] = model.k_used;
  fit["k_clamped"] = model.match.clamped;
  fit["lasso_used"] = model.lasso_used;
  fit["leaf_count"] = model.tree.leaf_count();
  fit["cp_selected"] = model.tree.cp_selected;
  fit["propensity_separation"] = model.scores.propensity.info.separation;
  if (model.config.overlap_eps > 0.0) {
    Json ov;
    ov["eps"] = model.overlap.eps;
    ov["violations"] = model.overlap.violating.size();
    fit["overlap"] = ov;
  }
  manifest["fit"] = fit;
  write_json_file(at("manifest.json"), manifest);
}

CateModel read_bundle(const std::string& dir) {
  const auto at = [&dir](const char* name) {
    return (std::filesystem::path(dir) / name).string();
  };
  CateModel model;
  model.scores = score_model_from_json(read_json_file(at("score_model.json")));
  model.tree = tree_from_json(read_json_file(at("tree.json")));
  return model;
}

}  // namespace ppcate
