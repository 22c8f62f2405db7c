#include "ppcate/simulation.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ppcate/errors.hpp"
#include "ppcate/inference.hpp"
#include "ppcate/parallel.hpp"
#include "ppcate/rng.hpp"

namespace ppcate {

namespace {

void check_spec(const ScenarioSpec& spec) {
  if (spec.id < 1 || spec.id > 7)
    throw ValidationError("scenario id must be in 1..7");
  if (spec.n < 2) throw ValidationError("scenario needs n >= 2");
  if (spec.d < 1) throw ValidationError("scenario needs d >= 1");
  if ((spec.id == 2 || spec.id == 3) && spec.d < 10)
    throw ValidationError("scenarios 2 and 3 need d >= 10 (fixed terms)");
  if (spec.id == 5 && spec.d > 99)
    throw ValidationError("scenario 5 needs d <= 99 (noise variance 100-d)");
  if (spec.id == 7 && spec.d < 6)
    throw ValidationError("scenario 7 needs d >= 6 (fixed coefficients)");
}

Eigen::MatrixXd draw_uniform_matrix(Rng& rng, int n, int d) {
  Eigen::MatrixXd X(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) X(i, j) = rng.uniform01();
  return X;
}

// Interaction/quadratic add-ons for scenarios 2 and 3 (1-based indices in
// the formulas).
double logit_extra(int id, const Eigen::MatrixXd& X, int i) {
  auto x = [&](int j) { return X(i, j - 1); };
  if (id == 2)
    return 0.5 * x(1) * x(3) + 0.7 * x(2) * x(4) + 0.5 * x(3) * x(5) +
           0.7 * x(4) * x(6) + 0.5 * x(5) * x(7) + 0.5 * x(1) * x(6) +
           0.7 * x(2) * x(3) + 0.5 * x(3) * x(4) + 0.5 * x(4) * x(5) +
           0.5 * x(5) * x(6);
  if (id == 3) return x(2) * x(2) + x(4) * x(4) - x(7) * x(7);
  return 0.0;
}

double prog_extra(int id, const Eigen::MatrixXd& X, int i) {
  auto x = [&](int j) { return X(i, j - 1); };
  if (id == 2)
    return 0.5 * x(1) * x(3) + 0.7 * x(2) * x(4) + 0.5 * x(3) * x(8) +
           0.7 * x(4) * x(9) + 0.5 * x(8) * x(10) + 0.5 * x(1) * x(9) +
           0.7 * x(2) * x(3) + 0.5 * x(3) * x(4) + 0.5 * x(4) * x(8) +
           0.5 * x(8) * x(9);
  if (id == 3) return x(2) * x(2) + x(4) * x(4) - x(10) * x(10);
  return 0.0;
}

// Scenarios 1-4 and 7 share the structure: uniform X, logistic treatment,
// additive outcome with a piecewise-constant effect over (e, p).
SimulatedData generate_score_family(const ScenarioSpec& spec) {
  const int n = spec.n, d = spec.d;
  Rng rng(spec.seed);

  SimulatedData out;
  if (spec.id == 7) {
    out.beta_e = Eigen::VectorXd::Zero(d);
    out.beta_p = Eigen::VectorXd::Zero(d);
    const double be[6] = {0.4, 0.9, -0.4, -0.7, -0.3, 0.6};
    const double bp[6] = {0.9, -0.9, 0.2, -0.2, 0.9, -0.9};
    for (int j = 0; j < 6; ++j) {
      out.beta_e[j] = be[j];
      out.beta_p[j] = bp[j];
    }
  } else {
    Rng coef_rng = spec.fix_coefficients
                       ? Rng(derive_seed(spec.coef_seed, "coefficients"))
                       : Rng(0);
    Rng& cr = spec.fix_coefficients ? coef_rng : rng;
    out.beta_e.resize(d);
    out.beta_p.resize(d);
    for (int j = 0; j < d; ++j) out.beta_e[j] = cr.uniform(-1.0, 1.0);
    for (int j = 0; j < d; ++j) out.beta_p[j] = cr.uniform(-1.0, 1.0);
  }

  out.ds.X = draw_uniform_matrix(rng, n, d);
  out.true_e.resize(n);
  out.true_p.resize(n);
  Eigen::VectorXd tau(n);
  for (int i = 0; i < n; ++i) {
    const double logit =
        out.ds.X.row(i).dot(out.beta_e) + logit_extra(spec.id, out.ds.X, i);
    out.true_e[i] = 1.0 / (1.0 + std::exp(-logit));
    out.true_p[i] = out.ds.X.row(i).dot(out.beta_p) +
                    prog_extra(spec.id, out.ds.X, i);
    if (spec.id == 4) {
      const bool e_hi = out.true_e[i] > spec.e_threshold;
      const bool p_hi = out.true_p[i] > spec.p_threshold;
      tau[i] = (e_hi ? 1.0 : 0.0) + (p_hi ? 1.0 : 0.0);
    } else {
      tau[i] = (out.true_e[i] < spec.e_threshold &&
                out.true_p[i] < spec.p_threshold)
                   ? 1.0
                   : 0.0;
    }
  }

  out.ds.z.resize(n);
  for (int i = 0; i < n; ++i)
    out.ds.z[i] = rng.bernoulli(out.true_e[i]) ? 1 : 0;
  out.ds.y.resize(n);
  for (int i = 0; i < n; ++i)
    out.ds.y[i] = out.true_p[i] + out.ds.z[i] * tau[i] + rng.normal();
  out.ds.tau_true = tau;
  return out;
}

SimulatedData generate_randomized(const ScenarioSpec& spec) {
  const int n = spec.n, d = spec.d;
  Rng rng(spec.seed);

  SimulatedData out;
  out.ds.X.resize(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) out.ds.X(i, j) = rng.normal();

  const int n_treated = (n + 1) / 2;  // ceil(n/2)
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  rng.shuffle(order);
  out.ds.z = Eigen::VectorXi::Zero(n);
  for (int i = 0; i < n_treated; ++i)
    out.ds.z[order[static_cast<std::size_t>(i)]] = 1;

  const double noise_sd = std::sqrt(100.0 - d);
  out.true_p.resize(n);
  out.ds.y.resize(n);
  for (int i = 0; i < n; ++i) {
    out.true_p[i] = 1.0 + out.ds.X.row(i).sum();
    out.ds.y[i] = out.true_p[i] + noise_sd * rng.normal();
  }
  out.true_e = Eigen::VectorXd::Constant(
      n, static_cast<double>(n_treated) / static_cast<double>(n));
  out.ds.tau_true = Eigen::VectorXd::Zero(n);
  return out;
}

SimulatedData generate_beta_propensity(const ScenarioSpec& spec) {
  const int n = spec.n, d = spec.d;
  Rng rng(spec.seed);

  SimulatedData out;
  out.ds.X = draw_uniform_matrix(rng, n, d);
  out.true_e.resize(n);
  for (int i = 0; i < n; ++i) {
    const double x1 = out.ds.X(i, 0);
    // Beta(2,4) density: 20 x (1-x)^3
    const double pdf = 20.0 * x1 * (1.0 - x1) * (1.0 - x1) * (1.0 - x1);
    out.true_e[i] = 0.25 * (1.0 + pdf);
  }
  out.ds.z.resize(n);
  for (int i = 0; i < n; ++i)
    out.ds.z[i] = rng.bernoulli(out.true_e[i]) ? 1 : 0;
  out.true_p.resize(n);
  out.ds.y.resize(n);
  for (int i = 0; i < n; ++i) {
    out.true_p[i] = 2.0 * out.ds.X(i, 0) - 1.0;
    out.ds.y[i] = out.true_p[i] + rng.normal();
  }
  out.ds.tau_true = Eigen::VectorXd::Zero(n);
  return out;
}

AxisMode method_axes(Method m) {
  switch (m) {
    case Method::pp: return AxisMode::both;
    case Method::psm: return AxisMode::propensity_only;
    case Method::prog: return AxisMode::prognostic_only;
  }
  throw ValidationError("unknown method");
}

double wall_seconds(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

SimulatedData generate(const ScenarioSpec& spec) {
  check_spec(spec);
  SimulatedData out;
  switch (spec.id) {
    case 1:
    case 2:
    case 3:
    case 4:
    case 7: out = generate_score_family(spec); break;
    case 5: out = generate_randomized(spec); break;
    case 6: out = generate_beta_propensity(spec); break;
    default: throw ValidationError("scenario id must be in 1..7");
  }
  require_valid(out.ds);
  return out;
}

std::string method_name(Method m) {
  switch (m) {
    case Method::pp: return "pp";
    case Method::psm: return "psm";
    case Method::prog: return "prog";
  }
  throw ValidationError("unknown method");
}

Method parse_method(const std::string& name) {
  if (name == "pp") return Method::pp;
  if (name == "psm") return Method::psm;
  if (name == "prog") return Method::prog;
  throw ValidationError("unknown method '" + name +
                        "' (expected pp, psm or prog)");
}

Eigen::VectorXd baseline_single_score(const Dataset& ds,
                                      const ScoredSample& scores,
                                      AxisMode which,
                                      const PipelineConfig& cfg,
                                      std::uint64_t seed) {
  PipelineConfig local = cfg;
  local.axes = which;
  const CateTree tree = fit_effect_tree(ds, scores, local, seed);
  return tree.predict(scores);
}

BenchmarkReport run_benchmark(const ScenarioSpec& spec,
                              const std::vector<Method>& methods, int trials,
                              const PipelineConfig& cfg, int bootstrap_B,
                              double level, int threads) {
  if (methods.empty()) throw ValidationError("no methods requested");
  if (trials < 1) throw ValidationError("trials must be >= 1");
  if (bootstrap_B < 0 || bootstrap_B == 1)
    throw ValidationError("bootstrap B must be 0 (off) or >= 2");

  BenchmarkReport report;
  report.spec = spec;
  report.config = cfg;
  report.methods = methods;
  report.trials = trials;
  report.bootstrap_B = bootstrap_B;
  report.level = level;
  report.trial_records.resize(static_cast<std::size_t>(trials));

  const std::size_t M = methods.size();
  parallel_for(trials, threads, [&](int t) {
    TrialRecord& rec = report.trial_records[static_cast<std::size_t>(t)];
    rec.seed = derive_seed(spec.seed, "trial", t);
    rec.mse.assign(M, std::numeric_limits<double>::quiet_NaN());
    rec.seconds.assign(M, 0.0);
    if (bootstrap_B > 0)
      rec.coverage.assign(M, std::numeric_limits<double>::quiet_NaN());
    try {
      ScenarioSpec trial_spec = spec;
      trial_spec.seed = rec.seed;
      const SimulatedData sim = generate(trial_spec);
      const Eigen::VectorXd& tau = *sim.ds.tau_true;
      rec.region_mass =
          (tau.array() != 0.0).cast<double>().sum() / tau.size();

      for (std::size_t m = 0; m < M; ++m) {
        const auto t0 = std::chrono::steady_clock::now();
        PipelineConfig mc = cfg;
        mc.axes = method_axes(methods[m]);
        const std::uint64_t fit_seed =
            derive_seed(rec.seed, "fit-" + method_name(methods[m]));
        const CateModel model = fit_cate(sim.ds, mc, fit_seed);
        rec.mse[m] = mse(model.tau_hat, tau);
        if (bootstrap_B > 0) {
          const BootstrapResult bs = bootstrap_ci(
              sim.ds, mc, bootstrap_B, level,
              derive_seed(rec.seed, "boot-" + method_name(methods[m])));
          rec.coverage[m] = coverage(bs, tau);
        }
        rec.seconds[m] = wall_seconds(t0);
      }
    } catch (const std::exception& e) {
      rec.failed = true;
      rec.error = e.what();
    }
  });

  report.mean_mse.assign(M, 0.0);
  report.mean_coverage.assign(M, 0.0);
  report.runtime_seconds.assign(M, 0.0);
  int ok = 0;
  for (const TrialRecord& rec : report.trial_records) {
    for (std::size_t m = 0; m < M; ++m)
      report.runtime_seconds[m] += rec.seconds[m];
    if (rec.failed) continue;
    ++ok;
    for (std::size_t m = 0; m < M; ++m) {
      report.mean_mse[m] += rec.mse[m];
      if (bootstrap_B > 0) report.mean_coverage[m] += rec.coverage[m];
    }
  }
  for (std::size_t m = 0; m < M; ++m) {
    if (ok > 0) {
      report.mean_mse[m] /= ok;
      report.mean_coverage[m] /= ok;
    } else {
      report.mean_mse[m] = std::numeric_limits<double>::quiet_NaN();
      report.mean_coverage[m] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  if (bootstrap_B == 0) report.mean_coverage.clear();
  return report;
}

std::vector<KSweepPoint> sweep_k(const ScenarioSpec& spec,
                                 const std::vector<int>& k_values, int trials,
                                 const PipelineConfig& cfg, int threads) {
  if (k_values.empty()) throw ValidationError("no K values requested");
  for (const int k : k_values)
    if (k < 1) throw ValidationError("K values must be positive");
  if (trials < 1) throw ValidationError("trials must be >= 1");

  const std::size_t K = k_values.size();
  std::vector<std::vector<double>> per_trial(
      static_cast<std::size_t>(trials), std::vector<double>(K, 0.0));

  parallel_for(trials, threads, [&](int t) {
    ScenarioSpec trial_spec = spec;
    trial_spec.seed = derive_seed(spec.seed, "trial", t);
    const SimulatedData sim = generate(trial_spec);
    const Eigen::VectorXd& tau = *sim.ds.tau_true;

    const ScoreModel models =
        fit_scores(sim.ds, cfg, derive_seed(trial_spec.seed, "scores"));
    const ScoredSample scores = score(models, sim.ds.X);

    for (std::size_t ki = 0; ki < K; ++ki) {
      PipelineConfig kc = cfg;
      kc.k = k_values[ki];
      const CateTree tree = fit_effect_tree(
          sim.ds, scores, kc,
          derive_seed(trial_spec.seed, "sweep-k", k_values[ki]));
      per_trial[static_cast<std::size_t>(t)][ki] =
          mse(tree.predict(scores), tau);
    }
  });

  std::vector<KSweepPoint> out(K);
  for (std::size_t ki = 0; ki < K; ++ki) {
    out[ki].k = k_values[ki];
    out[ki].trial_mse.resize(static_cast<std::size_t>(trials));
    double sum = 0.0;
    for (int t = 0; t < trials; ++t) {
      const double v = per_trial[static_cast<std::size_t>(t)][ki];
      out[ki].trial_mse[static_cast<std::size_t>(t)] = v;
      sum += v;
    }
    out[ki].mean_mse = sum / trials;
  }
  return out;
}

}  // namespace ppcate
