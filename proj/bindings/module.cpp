// Python bindings for the score-based effect estimator. Arrays cross the
// boundary as numpy/Eigen copies; larger structured results (benchmark and
// sweep reports, serialized models) cross as JSON strings and are decoded on
// the python side.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ppcate/errors.hpp"
#include "ppcate/inference.hpp"
#include "ppcate/io.hpp"
#include "ppcate/matching.hpp"
#include "ppcate/pipeline.hpp"
#include "ppcate/rng.hpp"
#include "ppcate/simulation.hpp"
#include "ppcate/version.hpp"

namespace py = pybind11;
using namespace ppcate;

namespace {

Dataset make_dataset(const Eigen::MatrixXd& X, const Eigen::VectorXi& z,
                     const Eigen::VectorXd& y,
                     const std::optional<Eigen::VectorXd>& tau_true) {
  Dataset ds;
  ds.X = X;
  ds.z = z;
  ds.y = y;
  ds.tau_true = tau_true;
  require_valid(ds);
  return ds;
}

std::string cp_rule_name(CpRule r) {
  return r == CpRule::one_se ? "one-se" : "min-cv";
}

CpRule cp_rule_from(const std::string& s) {
  if (s == "min-cv") return CpRule::min_cv;
  if (s == "one-se") return CpRule::one_se;
  throw ValidationError("cp_rule must be 'min-cv' or 'one-se'");
}

std::string penalty_name(PenaltyChoice p) {
  switch (p) {
    case PenaltyChoice::automatic: return "auto";
    case PenaltyChoice::none: return "none";
    case PenaltyChoice::lasso: return "lasso";
  }
  return "auto";
}

PenaltyChoice penalty_from(const std::string& s) {
  if (s == "auto") return PenaltyChoice::automatic;
  if (s == "none") return PenaltyChoice::none;
  if (s == "lasso") return PenaltyChoice::lasso;
  throw ValidationError("penalty must be 'auto', 'none' or 'lasso'");
}

std::string axes_name(AxisMode a) {
  switch (a) {
    case AxisMode::both: return "both";
    case AxisMode::propensity_only: return "propensity";
    case AxisMode::prognostic_only: return "prognostic";
  }
  return "both";
}

AxisMode axes_from(const std::string& s) {
  if (s == "both") return AxisMode::both;
  if (s == "propensity") return AxisMode::propensity_only;
  if (s == "prognostic") return AxisMode::prognostic_only;
  throw ValidationError("axes must be 'both', 'propensity' or 'prognostic'");
}

ScenarioSpec make_spec(int scenario, int n, int d, std::uint64_t seed,
                       double e_threshold, double p_threshold,
                       bool fix_coefficients, std::uint64_t coef_seed) {
  ScenarioSpec spec;
  spec.id = scenario;
  spec.n = n;
  spec.d = d;
  spec.seed = seed;
  spec.e_threshold = e_threshold;
  spec.p_threshold = p_threshold;
  spec.fix_coefficients = fix_coefficients;
  spec.coef_seed = coef_seed;
  return spec;
}

py::dict bootstrap_to_dict(const BootstrapResult& r) {
  py::dict out;
  out["B"] = r.B;
  out["level"] = r.level;
  out["lo"] = r.lo;
  out["hi"] = r.hi;
  out["estimates"] = r.per_unit_estimates;
  out["mean_width"] = r.mean_width();
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Conditional treatment effect estimation from propensity and "
      "prognostic scores: cross-arm K-nearest-neighbor matching in the 2D "
      "score space and a cross-validated regression tree over it.";
  m.attr("__version__") = kVersion;

  py::register_exception<ValidationError>(m, "ValidationError",
                                          PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_RuntimeError);

  py::class_<PipelineConfig>(m, "Config")
      .def(py::init<>())
      .def_readwrite("k", &PipelineConfig::k)
      .def_readwrite("min_node_size", &PipelineConfig::min_node_size)
      .def_readwrite("cp_floor", &PipelineConfig::cp_floor)
      .def_readwrite("folds", &PipelineConfig::folds)
      .def_readwrite("standardize_prognostic", &PipelineConfig::standardize_p)
      .def_readwrite("overlap_eps", &PipelineConfig::overlap_eps)
      .def_readwrite("lambda_grid_size", &PipelineConfig::lambda_grid_size)
      .def_readwrite("lambda_min_ratio", &PipelineConfig::lambda_min_ratio)
      .def_property(
          "cp_rule",
          [](const PipelineConfig& c) { return cp_rule_name(c.cp_rule); },
          [](PipelineConfig& c, const std::string& s) {
            c.cp_rule = cp_rule_from(s);
          })
      .def_property(
          "penalty",
          [](const PipelineConfig& c) { return penalty_name(c.penalty); },
          [](PipelineConfig& c, const std::string& s) {
            c.penalty = penalty_from(s);
          })
      .def_property(
          "axes", [](const PipelineConfig& c) { return axes_name(c.axes); },
          [](PipelineConfig& c, const std::string& s) {
            c.axes = axes_from(s);
          });

  py::class_<CateModel>(m, "Model")
      .def_property_readonly(
          "tau_hat", [](const CateModel& mo) { return mo.tau_hat; })
      .def_property_readonly(
          "e_hat", [](const CateModel& mo) { return mo.train_scores.e_hat; })
      .def_property_readonly(
          "p_hat", [](const CateModel& mo) { return mo.train_scores.p_hat; })
      .def_property_readonly(
          "proxy_effects",
          [](const CateModel& mo) { return mo.proxy.y_tilde; })
      .def_property_readonly(
          "k_used", [](const CateModel& mo) { return mo.k_used; })
      .def_property_readonly(
          "lasso_used", [](const CateModel& mo) { return mo.lasso_used; })
      .def_property_readonly(
          "leaf_count",
          [](const CateModel& mo) { return mo.tree.leaf_count(); })
      .def_property_readonly(
          "cp_selected",
          [](const CateModel& mo) { return mo.tree.cp_selected; })
      .def_property_readonly(
          "overlap_violations",
          [](const CateModel& mo) { return mo.overlap.violating; })
      .def("predict",
           [](const CateModel& mo, const Eigen::MatrixXd& X_new) {
             return predict_cate(mo, X_new);
           },
           py::arg("X"))
      .def("score",
           [](const CateModel& mo, const Eigen::MatrixXd& X_new) {
             const ScoredSample s = score(mo.scores, X_new);
             return py::make_tuple(s.e_hat, s.p_hat);
           },
           py::arg("X"),
           "Estimated (propensity, prognostic) scores for new units.")
      .def("tree_text",
           [](const CateModel& mo) { return tree_to_text(mo.tree); })
      .def("tree_json",
           [](const CateModel& mo) { return tree_to_json(mo.tree).dump(); })
      .def("score_model_json",
           [](const CateModel& mo) {
             return score_model_to_json(mo.scores).dump();
           })
      .def("save",
           [](const CateModel& mo, const std::string& dir, std::uint64_t seed,
              bool dump_matches, int grid_cells) {
             BundleOptions opts;
             opts.dump_matches = dump_matches;
             opts.grid_cells = grid_cells;
             write_bundle(dir, mo, seed, opts);
           },
           py::arg("dir"), py::arg("seed") = 0,
           py::arg("dump_matches") = false, py::arg("grid_cells") = 40);

  m.def("load", &read_bundle, py::arg("dir"),
        "Restore the predictive parts of a saved fit bundle.");

  m.def(
      "simulate",
      [](int scenario, int n, int d, std::uint64_t seed, double e_threshold,
         double p_threshold, bool fix_coefficients, std::uint64_t coef_seed) {
        const SimulatedData sim = generate(make_spec(
            scenario, n, d, seed, e_threshold, p_threshold, fix_coefficients,
            coef_seed));
        py::dict out;
        out["X"] = sim.ds.X;
        out["z"] = sim.ds.z;
        out["y"] = sim.ds.y;
        out["tau_true"] = *sim.ds.tau_true;
        out["true_e"] = sim.true_e;
        out["true_p"] = sim.true_p;
        out["beta_e"] = sim.beta_e;
        out["beta_p"] = sim.beta_p;
        return out;
      },
      py::arg("scenario"), py::arg("n") = 1000, py::arg("d") = 2,
      py::arg("seed") = 0, py::arg("e_threshold") = 0.6,
      py::arg("p_threshold") = 0.0, py::arg("fix_coefficients") = false,
      py::arg("coef_seed") = 0);

  m.def(
      "fit",
      [](const Eigen::MatrixXd& X, const Eigen::VectorXi& z,
         const Eigen::VectorXd& y, const PipelineConfig& cfg,
         std::uint64_t seed) {
        return fit_cate(make_dataset(X, z, y, std::nullopt), cfg, seed);
      },
      py::arg("X"), py::arg("z"), py::arg("y"),
      py::arg("config") = PipelineConfig{}, py::arg("seed") = 0);

  m.def(
      "bootstrap_ci",
      [](const Eigen::MatrixXd& X, const Eigen::VectorXi& z,
         const Eigen::VectorXd& y, const PipelineConfig& cfg, int B,
         double level, std::uint64_t seed, int threads) {
        const BootstrapResult r = bootstrap_ci(
            make_dataset(X, z, y, std::nullopt), cfg, B, level, seed, threads);
        return bootstrap_to_dict(r);
      },
      py::arg("X"), py::arg("z"), py::arg("y"),
      py::arg("config") = PipelineConfig{}, py::arg("B") = 1000,
      py::arg("level") = 0.95, py::arg("seed") = 0, py::arg("threads") = 1);

  m.def(
      "benchmark",
      [](int scenario, int n, int d, std::uint64_t seed,
         const std::vector<std::string>& methods, int trials,
         const PipelineConfig& cfg, int bootstrap_B, double level,
         int threads, double e_threshold, double p_threshold,
         bool fix_coefficients, std::uint64_t coef_seed) {
        std::vector<Method> ms;
        for (const std::string& name : methods)
          ms.push_back(parse_method(name));
        const BenchmarkReport rep = run_benchmark(
            make_spec(scenario, n, d, seed, e_threshold, p_threshold,
                      fix_coefficients, coef_seed),
            ms, trials, cfg, bootstrap_B, level, threads);
        return benchmark_report_to_json(rep).dump();
      },
      py::arg("scenario"), py::arg("n") = 1000, py::arg("d") = 2,
      py::arg("seed") = 0,
      py::arg("methods") = std::vector<std::string>{"pp", "psm", "prog"},
      py::arg("trials") = 20, py::arg("config") = PipelineConfig{},
      py::arg("bootstrap_B") = 0, py::arg("level") = 0.95,
      py::arg("threads") = 1, py::arg("e_threshold") = 0.6,
      py::arg("p_threshold") = 0.0, py::arg("fix_coefficients") = false,
      py::arg("coef_seed") = 0,
      "Monte Carlo benchmark; returns the report as a JSON string.");

  m.def(
      "sweep_k",
      [](int scenario, int n, int d, std::uint64_t seed,
         const std::vector<int>& k_values, int trials,
         const PipelineConfig& cfg, int threads) {
        const auto pts = sweep_k(make_spec(scenario, n, d, seed, 0.6, 0.0,
                                           false, 0),
                                 k_values, trials, cfg, threads);
        return sweep_to_json(make_spec(scenario, n, d, seed, 0.6, 0.0, false,
                                       0),
                             cfg, trials, pts)
            .dump();
      },
      py::arg("scenario"), py::arg("n") = 5000, py::arg("d") = 10,
      py::arg("seed") = 0, py::arg("k_values") = std::vector<int>{1, 5, 10},
      py::arg("trials") = 10, py::arg("config") = PipelineConfig{},
      py::arg("threads") = 1,
      "Matched-set size sensitivity; returns the sweep as a JSON string.");

  m.def("default_k", &default_k, py::arg("n"),
        "Matched-set size used when k = 0: max(1, round(ln n)).");
  m.def("derive_seed", &derive_seed, py::arg("master"), py::arg("label"),
        py::arg("index") = 0,
        "Labelled sub-stream seed used throughout the seeding protocol.");
}
