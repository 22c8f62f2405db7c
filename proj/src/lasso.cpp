#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ppcate/cv_folds.hpp"
#include "ppcate/errors.hpp"
#include "ppcate/rng.hpp"
#include "ppcate/score_models.hpp"

namespace ppcate {

namespace {

constexpr double kCoefTol = 1e-7;  // max coefficient change per sweep
constexpr int kMaxPasses = 100000;
constexpr int kMaxOuterIrls = 100;

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

void check_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw ValidationError("lambda grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 0.0) throw ValidationError("lambda grid has negative values");
    if (i > 0 && grid[i] > grid[i - 1])
      throw ValidationError("lambda grid must be sorted descending");
  }
}

// One model per lambda, already back-transformed to the original scale.
struct PathPoint {
  double intercept = 0.0;
  Eigen::VectorXd coef;
  int nonzero = 0;
};

// Cyclic coordinate descent for the squared-error lasso on a standardized
// design with centered response. Active-set sweeps between full passes.
// Returns total sweeps; beta/resid are updated in place.
int cd_linear(const Eigen::MatrixXd& Xs, const Eigen::VectorXd& sd,
              double lambda, Eigen::VectorXd& beta, Eigen::VectorXd& resid,
              bool& converged) {
  const int n = static_cast<int>(Xs.rows());
  const int d = static_cast<int>(Xs.cols());
  const double inv_n = 1.0 / n;
  int passes = 0;
  converged = false;

  auto sweep = [&](bool active_only) {
    double max_change = 0.0;
    for (int j = 0; j < d; ++j) {
      if (sd[j] == 0.0) continue;
      const double old = beta[j];
      if (active_only && old == 0.0) continue;
      const double rho = inv_n * Xs.col(j).dot(resid) + old;
      const double neu = soft_threshold(rho, lambda);
      if (neu != old) {
        resid -= (neu - old) * Xs.col(j);
        beta[j] = neu;
        max_change = std::max(max_change, std::abs(neu - old));
      }
    }
    ++passes;
    return max_change;
  };

  while (passes < kMaxPasses) {
    if (sweep(false) < kCoefTol) {
      converged = true;
      break;
    }
    while (passes < kMaxPasses && sweep(true) >= kCoefTol) {
    }
  }
  return passes;
}

// Full lasso path over `grid` for y ~ X on the given rows, warm-started from
// large to small lambda.
std::vector<PathPoint> linear_lasso_path(const Eigen::MatrixXd& X,
                                         const Eigen::VectorXd& y,
                                         const std::vector<double>& grid,
                                         int* total_passes, bool* all_converged) {
  const Standardized st = standardize_columns(X);
  const double y_mean = y.mean();
  const Eigen::VectorXd yc = y.array() - y_mean;

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(X.cols());
  Eigen::VectorXd resid = yc;
  std::vector<PathPoint> path;
  path.reserve(grid.size());
  for (const double lambda : grid) {
    bool conv = false;
    const int p = cd_linear(st.X, st.sd, lambda, beta, resid, conv);
    if (total_passes) *total_passes += p;
    if (all_converged && !conv) *all_converged = false;

    PathPoint pt;
    pt.coef = Eigen::VectorXd::Zero(X.cols());
    for (int j = 0; j < X.cols(); ++j)
      if (st.sd[j] > 0.0 && beta[j] != 0.0) {
        pt.coef[j] = beta[j] / st.sd[j];
        ++pt.nonzero;
      }
    pt.intercept = y_mean - pt.coef.dot(st.mean);
    path.push_back(std::move(pt));
  }
  return path;
}

// Penalized logistic via IRLS with an inner weighted coordinate descent
// (the standard quadratic-approximation scheme). Standardized design,
// unpenalized intercept.
struct LogisticLassoState {
  double b0 = 0.0;
  Eigen::VectorXd beta;
};

int logistic_lasso_fit(const Eigen::MatrixXd& Xs, const Eigen::VectorXd& sd,
                       const Eigen::VectorXd& z, double lambda,
                       LogisticLassoState& stately, bool& converged) {
  const int n = static_cast<int>(Xs.rows());
  const int d = static_cast<int>(Xs.cols());
  const double inv_n = 1.0 / n;
  int passes = 0;
  converged = false;

  for (int outer = 0; outer < kMaxOuterIrls; ++outer) {
    const Eigen::VectorXd eta =
        (Xs * stately.beta).array() + stately.b0;
    Eigen::VectorXd w(n), u(n);
    for (int i = 0; i < n; ++i) {
      const double mu = sigmoid(eta[i]);
      const double wi = std::max(mu * (1.0 - mu), 1e-5);
      w[i] = wi;
      u[i] = eta[i] + (z[i] - mu) / wi;
    }
    const double w_sum = w.sum();
    Eigen::VectorXd denom(d);
    for (int j = 0; j < d; ++j)
      denom[j] = sd[j] == 0.0 ? 0.0
                              : inv_n * (w.array() * Xs.col(j).array().square()).sum();

    // residual of the weighted working response
    Eigen::VectorXd resid = u - eta;
    double b0 = stately.b0;
    Eigen::VectorXd beta = stately.beta;

    auto sweep = [&](bool active_only) {
      double max_change = 0.0;
      const double db0 = (w.array() * resid.array()).sum() / w_sum;
      if (db0 != 0.0) {
        b0 += db0;
        resid.array() -= db0;
        max_change = std::abs(db0);
      }
      for (int j = 0; j < d; ++j) {
        if (sd[j] == 0.0) continue;
        const double old = beta[j];
        if (active_only && old == 0.0) continue;
        const double rho =
            inv_n * (w.array() * Xs.col(j).array() * resid.array()).sum() +
            denom[j] * old;
        const double neu = soft_threshold(rho, lambda) / denom[j];
        if (neu != old) {
          resid -= (neu - old) * Xs.col(j);
          beta[j] = neu;
          max_change = std::max(max_change, std::abs(neu - old));
        }
      }
      ++passes;
      return max_change;
    };

    while (passes < kMaxPasses) {
      if (sweep(false) < kCoefTol) break;
      while (passes < kMaxPasses && sweep(true) >= kCoefTol) {
      }
    }

    const double outer_change = std::max(
        std::abs(b0 - stately.b0),
        (beta - stately.beta).lpNorm<Eigen::Infinity>());
    stately.b0 = b0;
    stately.beta = beta;
    if (outer_change < kCoefTol) {
      converged = true;
      break;
    }
  }
  return passes;
}

std::vector<PathPoint> logistic_lasso_path(const Eigen::MatrixXd& X,
                                           const Eigen::VectorXd& z,
                                           const std::vector<double>& grid,
                                           int* total_passes,
                                           bool* all_converged) {
  const Standardized st = standardize_columns(X);
  const double zbar = z.mean();
  LogisticLassoState state;
  state.b0 = std::log(zbar / (1.0 - zbar));
  state.beta = Eigen::VectorXd::Zero(X.cols());

  std::vector<PathPoint> path;
  path.reserve(grid.size());
  for (const double lambda : grid) {
    bool conv = false;
    const int p = logistic_lasso_fit(st.X, st.sd, z, lambda, state, conv);
    if (total_passes) *total_passes += p;
    if (all_converged && !conv) *all_converged = false;

    PathPoint pt;
    pt.coef = Eigen::VectorXd::Zero(X.cols());
    for (int j = 0; j < X.cols(); ++j)
      if (st.sd[j] > 0.0 && state.beta[j] != 0.0) {
        pt.coef[j] = state.beta[j] / st.sd[j];
        ++pt.nonzero;
      }
    pt.intercept = state.b0 - pt.coef.dot(st.mean);
    path.push_back(std::move(pt));
  }
  return path;
}

double mean_deviance(const Eigen::VectorXd& z, const Eigen::VectorXd& eta) {
  double dev = 0.0;
  for (int i = 0; i < z.size(); ++i) {
    const double mu =
        std::clamp(sigmoid(eta[i]), 1e-10, 1.0 - 1e-10);
    dev += -2.0 * (z[i] * std::log(mu) + (1.0 - z[i]) * std::log(1.0 - mu));
  }
  return dev / z.size();
}

void finalize_cv(const std::vector<std::vector<double>>& fold_means,
                 const std::vector<double>& pooled, CvPath& cv) {
  const std::size_t folds = fold_means.size();
  const std::size_t L = pooled.size();
  cv.cv_error = pooled;
  cv.cv_se.assign(L, 0.0);
  for (std::size_t l = 0; l < L; ++l) {
    double m = 0.0;
    for (std::size_t f = 0; f < folds; ++f) m += fold_means[f][l];
    m /= folds;
    double v = 0.0;
    for (std::size_t f = 0; f < folds; ++f) {
      const double dlt = fold_means[f][l] - m;
      v += dlt * dlt;
    }
    v /= folds > 1 ? folds - 1 : 1;
    cv.cv_se[l] = std::sqrt(v / folds);
  }
  // min CV error, ties to the larger lambda (grid is descending)
  int best = 0;
  for (std::size_t l = 1; l < L; ++l)
    if (cv.cv_error[l] < cv.cv_error[static_cast<std::size_t>(best)]) best = static_cast<int>(l);
  cv.selected = best;
}

}  // namespace

std::vector<double> default_lambda_grid(double lambda_max, int size,
                                        double ratio) {
  if (size < 1 || lambda_max <= 0.0 || ratio <= 0.0 || ratio >= 1.0)
    throw ValidationError("invalid lambda grid parameters");
  std::vector<double> grid(static_cast<std::size_t>(size));
  if (size == 1) {
    grid[0] = lambda_max;
    return grid;
  }
  const double log_max = std::log(lambda_max);
  const double log_min = std::log(lambda_max * ratio);
  for (int k = 0; k < size; ++k)
    grid[static_cast<std::size_t>(k)] =
        std::exp(log_max + (log_min - log_max) * k / (size - 1));
  return grid;
}

double prognostic_lambda_max(const Dataset& ds) {
  require_valid(ds);
  const auto rows = ds.control_indices();
  const int nc = static_cast<int>(rows.size());
  Eigen::MatrixXd Xc(nc, ds.d());
  Eigen::VectorXd yc(nc);
  for (int r = 0; r < nc; ++r) {
    Xc.row(r) = ds.X.row(rows[static_cast<std::size_t>(r)]);
    yc[r] = ds.y[rows[static_cast<std::size_t>(r)]];
  }
  const Standardized st = standardize_columns(Xc);
  const Eigen::VectorXd centered = yc.array() - yc.mean();
  double lam = 0.0;
  for (int j = 0; j < ds.d(); ++j)
    if (st.sd[j] > 0.0)
      lam = std::max(lam, std::abs(st.X.col(j).dot(centered)) / nc);
  return lam;
}

double propensity_lambda_max(const Dataset& ds) {
  require_valid(ds);
  const Standardized st = standardize_columns(ds.X);
  const Eigen::VectorXd z = ds.z.cast<double>();
  const Eigen::VectorXd centered = z.array() - z.mean();
  double lam = 0.0;
  for (int j = 0; j < ds.d(); ++j)
    if (st.sd[j] > 0.0)
      lam = std::max(lam, std::abs(st.X.col(j).dot(centered)) / ds.n());
  return lam;
}

LinearScoreModel fit_prognostic_lasso_at(const Dataset& ds, double lambda) {
  require_valid(ds);
  if (lambda < 0.0) throw ValidationError("lambda must be >= 0");
  const auto rows = ds.control_indices();
  const Dataset ctl = ds.subset(rows);
  int passes = 0;
  bool conv = true;
  const auto path =
      linear_lasso_path(ctl.X, ctl.y, {lambda}, &passes, &conv);
  LinearScoreModel m;
  m.penalty = PenaltyMode::lasso;
  m.lambda = lambda;
  m.intercept = path[0].intercept;
  m.coef = path[0].coef;
  m.info.converged = conv;
  m.info.iterations = passes;
  return m;
}

LinearScoreModel fit_propensity_lasso_at(const Dataset& ds, double lambda) {
  require_valid(ds);
  if (lambda < 0.0) throw ValidationError("lambda must be >= 0");
  int passes = 0;
  bool conv = true;
  const auto path = logistic_lasso_path(ds.X, ds.z.cast<double>(), {lambda},
                                        &passes, &conv);
  LinearScoreModel m;
  m.penalty = PenaltyMode::lasso;
  m.lambda = lambda;
  m.intercept = path[0].intercept;
  m.coef = path[0].coef;
  m.info.converged = conv;
  m.info.iterations = passes;
  return m;
}

LinearScoreModel fit_prognostic_lasso(const Dataset& ds,
                                      const std::vector<double>& lambda_grid,
                                      int folds, std::uint64_t seed) {
  require_valid(ds);
  check_grid(lambda_grid);
  const auto rows = ds.control_indices();
  const int nc = static_cast<int>(rows.size());
  if (folds < 2) throw ValidationError("folds must be >= 2");
  if (folds > nc)
    throw ValidationError("folds exceed the number of control units");
  const Dataset ctl = ds.subset(rows);

  Rng rng(derive_seed(seed, "folds"));
  const std::vector<int> fold_of = assign_folds(nc, folds, rng);

  const std::size_t L = lambda_grid.size();
  std::vector<std::vector<double>> fold_means(
      static_cast<std::size_t>(folds), std::vector<double>(L, 0.0));
  std::vector<double> pooled(L, 0.0);

  for (int f = 0; f < folds; ++f) {
    std::vector<int> train, test;
    for (int i = 0; i < nc; ++i)
      (fold_of[static_cast<std::size_t>(i)] == f ? test : train).push_back(i);
    const Dataset tr = ctl.subset(train);
    const Dataset te = ctl.subset(test);
    const auto path = linear_lasso_path(tr.X, tr.y, lambda_grid, nullptr, nullptr);
    for (std::size_t l = 0; l < L; ++l) {
      const Eigen::VectorXd pred =
          (te.X * path[l].coef).array() + path[l].intercept;
      const double sse = (te.y - pred).squaredNorm();
      fold_means[static_cast<std::size_t>(f)][l] = sse / te.n();
      pooled[l] += sse;
    }
  }
  for (auto& v : pooled) v /= nc;

  LinearScoreModel m;
  m.penalty = PenaltyMode::lasso;
  m.cv.lambdas = lambda_grid;
  finalize_cv(fold_means, pooled, m.cv);

  int passes = 0;
  bool conv = true;
  const auto full_path =
      linear_lasso_path(ctl.X, ctl.y, lambda_grid, &passes, &conv);
  m.cv.nonzero.resize(L);
  for (std::size_t l = 0; l < L; ++l)
    m.cv.nonzero[l] = full_path[l].nonzero;
  const auto& sel = full_path[static_cast<std::size_t>(m.cv.selected)];
  m.lambda = m.cv.lambda_selected();
  m.intercept = sel.intercept;
  m.coef = sel.coef;
  m.info.converged = conv;
  m.info.iterations = passes;
  return m;
}

LinearScoreModel fit_propensity_lasso(const Dataset& ds,
                                      const std::vector<double>& lambda_grid,
                                      int folds, std::uint64_t seed) {
  require_valid(ds);
  check_grid(lambda_grid);
  const int n = ds.n();
  if (folds < 2) throw ValidationError("folds must be >= 2");
  if (folds > n) throw ValidationError("folds exceed the number of units");

  // Stratified on z: shuffle each arm, deal round-robin.
  auto stratified = [&](std::uint64_t s) {
    Rng rng(s);
    std::vector<int> fold_of(static_cast<std::size_t>(n), 0);
    for (const int label : {1, 0}) {
      std::vector<int> arm;
      for (int i = 0; i < n; ++i)
        if (ds.z[i] == label) arm.push_back(i);
      rng.shuffle(arm);
      for (std::size_t pos = 0; pos < arm.size(); ++pos)
        fold_of[static_cast<std::size_t>(arm[pos])] =
            static_cast<int>(pos) % folds;
    }
    return fold_of;
  };
  auto has_single_class_train = [&](const std::vector<int>& fold_of) {
    for (int f = 0; f < folds; ++f) {
      int treated = 0, control = 0;
      for (int i = 0; i < n; ++i) {
        if (fold_of[static_cast<std::size_t>(i)] == f) continue;
        (ds.z[i] == 1 ? treated : control)++;
      }
      if (treated == 0 || control == 0) return true;
    }
    return false;
  };

  std::vector<int> fold_of = stratified(derive_seed(seed, "folds"));
  if (has_single_class_train(fold_of)) {
    fold_of = stratified(derive_seed(seed, "folds-retry"));
    if (has_single_class_train(fold_of))
      throw ValidationError(
          "cross-validation fold with single-class treatment; reduce folds");
  }

  const Eigen::VectorXd z = ds.z.cast<double>();
  const std::size_t L = lambda_grid.size();
  std::vector<std::vector<double>> fold_means(
      static_cast<std::size_t>(folds), std::vector<double>(L, 0.0));
  std::vector<double> pooled(L, 0.0);

  for (int f = 0; f < folds; ++f) {
    std::vector<int> train, test;
    for (int i = 0; i < n; ++i)
      (fold_of[static_cast<std::size_t>(i)] == f ? test : train).push_back(i);
    const Dataset tr = ds.subset(train);
    const Dataset te = ds.subset(test);
    const auto path =
        logistic_lasso_path(tr.X, tr.z.cast<double>(), lambda_grid, nullptr,
                            nullptr);
    for (std::size_t l = 0; l < L; ++l) {
      const Eigen::VectorXd eta =
          (te.X * path[l].coef).array() + path[l].intercept;
      const double dev = mean_deviance(te.z.cast<double>(), eta);
      fold_means[static_cast<std::size_t>(f)][l] = dev;
      pooled[l] += dev * te.n();
    }
  }
  for (auto& v : pooled) v /= n;

  LinearScoreModel m;
  m.penalty = PenaltyMode::lasso;
  m.cv.lambdas = lambda_grid;
  finalize_cv(fold_means, pooled, m.cv);

  int passes = 0;
  bool conv = true;
  const auto full_path =
      logistic_lasso_path(ds.X, z, lambda_grid, &passes, &conv);
  m.cv.nonzero.resize(L);
  for (std::size_t l = 0; l < L; ++l)
    m.cv.nonzero[l] = full_path[l].nonzero;
  const auto& sel = full_path[static_cast<std::size_t>(m.cv.selected)];
  m.lambda = m.cv.lambda_selected();
  m.intercept = sel.intercept;
  m.coef = sel.coef;
  m.info.converged = conv;
  m.info.iterations = passes;
  return m;
}

}  // namespace ppcate
