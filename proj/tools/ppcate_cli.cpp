// Command-line front end: simulate scenario data, fit/predict the score-based
// effect estimator, bootstrap intervals, and run the benchmark/K-sweep loops.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "ppcate/csv.hpp"
#include "ppcate/errors.hpp"
#include "ppcate/inference.hpp"
#include "ppcate/io.hpp"
#include "ppcate/pipeline.hpp"
#include "ppcate/rng.hpp"
#include "ppcate/simulation.hpp"
#include "ppcate/version.hpp"

namespace {

using namespace ppcate;

struct PipelineFlags {
  int k = 0;
  int min_node = 20;
  double cp_floor = 0.01;
  std::string cp_rule = "min-cv";
  std::string penalty = "auto";
  int folds = 10;
  double eps = 0.0;
  bool standardize_prognostic = false;

  PipelineConfig to_config() const {
    PipelineConfig cfg;
    cfg.k = k;
    cfg.min_node_size = min_node;
    cfg.cp_floor = cp_floor;
    if (cp_rule == "min-cv")
      cfg.cp_rule = CpRule::min_cv;
    else if (cp_rule == "one-se")
      cfg.cp_rule = CpRule::one_se;
    else
      throw ValidationError("unknown --cp-rule '" + cp_rule + "'");
    if (penalty == "auto")
      cfg.penalty = PenaltyChoice::automatic;
    else if (penalty == "none")
      cfg.penalty = PenaltyChoice::none;
    else if (penalty == "lasso")
      cfg.penalty = PenaltyChoice::lasso;
    else
      throw ValidationError("unknown --penalty '" + penalty + "'");
    cfg.folds = folds;
    cfg.overlap_eps = eps;
    cfg.standardize_p = standardize_prognostic;
    return cfg;
  }
};

void add_pipeline_flags(CLI::App* cmd, PipelineFlags& f) {
  cmd->add_option("--k", f.k, "Matched-set size (0 = auto, round(ln n))");
  cmd->add_option("--min-node", f.min_node, "Minimum tree leaf size");
  cmd->add_option("--cp-floor", f.cp_floor,
                  "Minimum relative SSE gain kept while growing");
  cmd->add_option("--cp-rule", f.cp_rule, "Pruning rule: min-cv or one-se");
  cmd->add_option("--penalty", f.penalty,
                  "Score regression penalty: auto, none or lasso");
  cmd->add_option("--folds", f.folds, "Cross-validation folds");
  cmd->add_option("--eps", f.eps,
                  "Report propensity overlap violations outside [eps, 1-eps]");
  cmd->add_flag("--standardize-prognostic", f.standardize_prognostic,
                "Scale p_hat to unit variance in the matching distance");
}

struct ColumnFlags {
  std::string y_col = "y";
  std::string z_col = "z";
  std::string tau_col = "tau_true";
  std::vector<std::string> x_cols;
  bool ignore_extra = false;

  ColumnMap to_map() const {
    ColumnMap m;
    m.y = y_col;
    m.z = z_col;
    m.tau = tau_col;
    m.x_cols = x_cols;
    m.ignore_extra = ignore_extra;
    return m;
  }
};

void add_column_flags(CLI::App* cmd, ColumnFlags& f) {
  cmd->add_option("--y-col", f.y_col, "Outcome column name");
  cmd->add_option("--z-col", f.z_col, "Treatment column name");
  cmd->add_option("--tau-col", f.tau_col, "True-effect column name");
  cmd->add_option("--x-cols", f.x_cols,
                  "Explicit covariate columns (default: x1..xd)")
      ->delimiter(',');
  cmd->add_flag("--ignore-extra", f.ignore_extra,
                "Ignore unrecognized CSV columns");
}

std::vector<Method> parse_methods(const std::string& csv) {
  std::vector<Method> out;
  std::string token;
  for (std::size_t i = 0; i <= csv.size(); ++i) {
    if (i == csv.size() || csv[i] == ',') {
      if (!token.empty()) out.push_back(parse_method(token));
      token.clear();
    } else {
      token += csv[i];
    }
  }
  if (out.empty()) throw ValidationError("--methods is empty");
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{
      "Score-based conditional treatment effect estimation: propensity and "
      "prognostic scores, cross-arm nearest-neighbor matching, and a pruned "
      "effect tree over the 2D score space."};
  app.require_subcommand(1);
  app.fallthrough();  // global flags like --threads may follow the subcommand
  app.set_version_flag("--version", std::string("ppcate ") + kVersion);
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  app.add_option("--threads", threads,
                 "Worker threads for trials/resamples (results do not depend "
                 "on this)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Draw a synthetic scenario");
  ScenarioSpec spec;
  std::string sim_out;
  std::uint64_t sim_seed = 0;
  sim->add_option("--scenario", spec.id, "Scenario id 1-7")->required();
  sim->add_option("--n", spec.n, "Sample size");
  sim->add_option("--d", spec.d, "Covariate dimension");
  sim->add_option("--seed", sim_seed, "Master seed");
  sim->add_option("--e-threshold", spec.e_threshold,
                  "Propensity boundary of the effect region");
  sim->add_option("--p-threshold", spec.p_threshold,
                  "Prognostic boundary of the effect region");
  sim->add_flag("--fix-coefficients", spec.fix_coefficients,
                "Draw scenario coefficients from --coef-seed, not the seed");
  sim->add_option("--coef-seed", spec.coef_seed,
                  "Seed for the fixed coefficient draw");
  sim->add_option("--out", sim_out, "Output CSV path")->required();

  // fit
  auto* fit = app.add_subcommand("fit", "Fit the estimator on a CSV");
  std::string fit_in, fit_out;
  std::uint64_t fit_seed = 0;
  PipelineFlags fit_flags;
  ColumnFlags fit_cols;
  bool dump_matches = false;
  int grid_cells = 40;
  fit->add_option("--in", fit_in, "Input CSV (y, z, x1..xd)")->required();
  fit->add_option("--out", fit_out, "Bundle directory")->required();
  fit->add_option("--seed", fit_seed, "Master seed");
  add_pipeline_flags(fit, fit_flags);
  add_column_flags(fit, fit_cols);
  fit->add_flag("--dump-matches", dump_matches,
                "Also write matches.csv (unit, rank, neighbor, distance)");
  fit->add_option("--grid-cells", grid_cells, "Grid resolution per axis");

  // predict
  auto* pred = app.add_subcommand("predict", "Predict effects for new units");
  std::string pred_bundle, pred_in, pred_out;
  ColumnFlags pred_cols;
  pred->add_option("--bundle", pred_bundle, "Bundle directory from fit")
      ->required();
  pred->add_option("--in", pred_in, "CSV with covariate columns")->required();
  pred->add_option("--out", pred_out, "Output CSV (e_hat, p_hat, tau_hat)")
      ->required();
  add_column_flags(pred, pred_cols);

  // bootstrap-ci
  auto* boot = app.add_subcommand("bootstrap-ci",
                                  "Percentile intervals via the bootstrap");
  std::string boot_in, boot_out;
  std::uint64_t boot_seed = 0;
  int boot_B = 1000;
  double boot_level = 0.95;
  PipelineFlags boot_flags;
  ColumnFlags boot_cols;
  boot->add_option("--in", boot_in, "Input CSV")->required();
  boot->add_option("--out", boot_out, "Output directory")->required();
  boot->add_option("--seed", boot_seed, "Master seed");
  boot->add_option("--b", boot_B, "Bootstrap resamples");
  boot->add_option("--level", boot_level, "Interval level in (0,1)");
  add_pipeline_flags(boot, boot_flags);
  add_column_flags(boot, boot_cols);

  // bench
  auto* bench = app.add_subcommand("bench", "Monte Carlo benchmark");
  ScenarioSpec bench_spec;
  std::string bench_out, bench_methods = "pp,psm,prog";
  std::uint64_t bench_seed = 0;
  int bench_trials = 20, bench_B = 0;
  double bench_level = 0.95;
  PipelineFlags bench_flags;
  bench->add_option("--scenario", bench_spec.id, "Scenario id 1-7")
      ->required();
  bench->add_option("--n", bench_spec.n, "Sample size");
  bench->add_option("--d", bench_spec.d, "Covariate dimension");
  bench->add_option("--seed", bench_seed, "Master seed");
  bench->add_option("--e-threshold", bench_spec.e_threshold,
                    "Propensity boundary of the effect region");
  bench->add_option("--p-threshold", bench_spec.p_threshold,
                    "Prognostic boundary of the effect region");
  bench->add_flag("--fix-coefficients", bench_spec.fix_coefficients,
                  "Hold scenario coefficients fixed across trials");
  bench->add_option("--coef-seed", bench_spec.coef_seed,
                    "Seed for the fixed coefficient draw");
  bench->add_option("--trials", bench_trials, "Monte Carlo trials");
  bench->add_option("--methods", bench_methods,
                    "Comma list from pp, psm, prog");
  bench->add_option("--b", bench_B, "Bootstrap resamples per trial (0 = off)");
  bench->add_option("--level", bench_level, "Interval level");
  bench->add_option("--out", bench_out, "Report JSON path")->required();
  add_pipeline_flags(bench, bench_flags);

  // sweep-k
  auto* sweep = app.add_subcommand("sweep-k", "Matched-set size sensitivity");
  ScenarioSpec sweep_spec;
  sweep_spec.n = 5000;
  sweep_spec.d = 10;
  std::string sweep_out;
  std::uint64_t sweep_seed = 0;
  int sweep_trials = 10, sweep_kmax = 0;
  std::vector<int> sweep_values;
  PipelineFlags sweep_flags;
  sweep->add_option("--scenario", sweep_spec.id, "Scenario id 1-7")
      ->required();
  sweep->add_option("--n", sweep_spec.n, "Sample size");
  sweep->add_option("--d", sweep_spec.d, "Covariate dimension");
  sweep->add_option("--seed", sweep_seed, "Master seed");
  sweep->add_option("--trials", sweep_trials, "Trials per K");
  sweep->add_option("--kmax", sweep_kmax, "Sweep K = 1..kmax");
  sweep->add_option("--k-values", sweep_values, "Explicit K list")
      ->delimiter(',');
  sweep->add_option("--out", sweep_out, "Sweep JSON path")->required();
  add_pipeline_flags(sweep, sweep_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version exit 0; anything else is a usage/validation error.
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (sim->parsed()) {
    spec.seed = sim_seed;
    const SimulatedData data = generate(spec);
    write_dataset_csv(sim_out, data.ds);
    std::cout << "wrote " << sim_out << " (n=" << data.ds.n()
              << ", d=" << data.ds.d() << ")\n";
    return 0;
  }

  if (fit->parsed()) {
    const Dataset ds = read_dataset_csv(fit_in, fit_cols.to_map());
    const PipelineConfig cfg = fit_flags.to_config();
    const CateModel model = fit_cate(ds, cfg, fit_seed);
    if (cfg.overlap_eps > 0.0 && model.overlap.violated())
      std::cerr << "warning: " << model.overlap.violating.size()
                << " unit(s) violate propensity overlap at eps="
                << format_double(cfg.overlap_eps) << "\n";
    if (model.match.clamped)
      std::cerr << "warning: K clamped to the opposite arm size\n";
    BundleOptions opts;
    opts.dump_matches = dump_matches;
    opts.grid_cells = grid_cells;
    write_bundle(fit_out, model, fit_seed, opts);
    std::cout << "wrote bundle " << fit_out << " (leaves="
              << model.tree.leaf_count() << ", k=" << model.k_used << ")\n";
    return 0;
  }

  if (pred->parsed()) {
    const CateModel model = read_bundle(pred_bundle);
    const Eigen::MatrixXd X = read_covariates_csv(pred_in, pred_cols.to_map());
    const ScoredSample s = score(model.scores, X);
    const Eigen::VectorXd tau = model.tree.predict(s);
    std::ofstream os(pred_out);
    if (!os) throw ValidationError("cannot write '" + pred_out + "'");
    os << "e_hat,p_hat,tau_hat\n";
    for (Eigen::Index i = 0; i < tau.size(); ++i)
      os << format_double(s.e_hat[i]) << ',' << format_double(s.p_hat[i])
         << ',' << format_double(tau[i]) << '\n';
    std::cout << "wrote " << pred_out << " (" << tau.size() << " rows)\n";
    return 0;
  }

  if (boot->parsed()) {
    ColumnMap cols = boot_cols.to_map();
    const Dataset ds = read_dataset_csv(boot_in, cols);
    const PipelineConfig cfg = boot_flags.to_config();
    const CateModel point = fit_cate(ds, cfg, derive_seed(boot_seed, "fit"));
    const BootstrapResult result =
        bootstrap_ci(ds, cfg, boot_B, boot_level, boot_seed, threads);

    std::error_code ec;
    std::filesystem::create_directories(boot_out, ec);
    if (ec) throw ValidationError("cannot create directory '" + boot_out + "'");
    const auto at = [&boot_out](const char* name) {
      return (std::filesystem::path(boot_out) / name).string();
    };
    write_intervals_csv(at("intervals.csv"), point.tau_hat, result);

    Json summary;
    summary["schema_version"] = kSchemaVersion;
    summary["B"] = result.B;
    summary["level"] = result.level;
    summary["seed"] = boot_seed;
    summary["n"] = ds.n();
    summary["d"] = ds.d();
    summary["mean_width"] = result.mean_width();
    if (ds.tau_true) summary["coverage"] = coverage(result, *ds.tau_true);
    summary["config"] = pipeline_config_to_json(point.config);
    write_json_file(at("summary.json"), summary);
    std::cout << "wrote " << boot_out << " (B=" << result.B
              << ", mean width=" << format_double(result.mean_width())
              << ")\n";
    return 0;
  }

  if (bench->parsed()) {
    bench_spec.seed = bench_seed;
    const BenchmarkReport report =
        run_benchmark(bench_spec, parse_methods(bench_methods), bench_trials,
                      bench_flags.to_config(), bench_B, bench_level, threads);
    write_json_file(bench_out, benchmark_report_to_json(report));
    std::cout << "wrote " << bench_out << "\n";
    for (std::size_t m = 0; m < report.methods.size(); ++m)
      std::cout << "  " << method_name(report.methods[m])
                << " mean MSE=" << format_double(report.mean_mse[m]) << "\n";
    return 0;
  }

  if (sweep->parsed()) {
    sweep_spec.seed = sweep_seed;
    std::vector<int> ks = sweep_values;
    if (ks.empty()) {
      if (sweep_kmax < 1)
        throw ValidationError("provide --kmax or --k-values");
      for (int k = 1; k <= sweep_kmax; ++k) ks.push_back(k);
    }
    const auto points = sweep_k(sweep_spec, ks, sweep_trials,
                                sweep_flags.to_config(), threads);
    write_json_file(sweep_out,
                    sweep_to_json(sweep_spec, sweep_flags.to_config(),
                                  sweep_trials, points));
    std::cout << "wrote " << sweep_out << "\n";
    for (const auto& p : points)
      std::cout << "  K=" << p.k
                << " mean MSE=" << format_double(p.mean_mse) << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ppcate::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ppcate::NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
