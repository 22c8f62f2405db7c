#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "ppcate/dataset.hpp"

namespace ppcate {

enum class PenaltyMode { none, lasso };

struct FitInfo {
  bool converged = false;
  int iterations = 0;
  bool separation = false;        // propensity quasi-separation detected
  bool ridge_stabilized = false;  // Newton fell back to a tiny ridge
  std::vector<double> objective_path;  // objective after each accepted step
};

// Cross-validation trace along a lambda grid (sorted descending).
struct CvPath {
  std::vector<double> lambdas;
  std::vector<double> cv_error;  // mean deviance (propensity) / MSE (prognostic)
  std::vector<double> cv_se;     // standard error of the per-fold means
  std::vector<int> nonzero;      // support size of the full-data fit per lambda
  int selected = -1;
  double lambda_selected() const {
    return selected >= 0 ? lambdas[static_cast<std::size_t>(selected)] : 0.0;
  }
};

// A fitted linear score model. The intercept is always present internally and
// never penalized; coefficients are reported on the original covariate scale.
struct LinearScoreModel {
  double intercept = 0.0;
  Eigen::VectorXd coef;
  PenaltyMode penalty = PenaltyMode::none;
  double lambda = 0.0;
  FitInfo info;
  CvPath cv;
};

struct ScoreModel {
  LinearScoreModel propensity;
  LinearScoreModel prognostic;
  int d = 0;
};

// Propensity model: logistic regression of z on X over all units, fit by
// damped Newton (IRLS) with step halving. Converges when the max-norm of the
// log-likelihood gradient drops below 1e-8 (100 iteration cap). If the linear
// predictor blows past +-30 on >= 10% of units the fit is flagged as
// separated and redone with a ridge penalty of 1e-6 on the slopes.
LinearScoreModel fit_propensity(const Dataset& ds);

// Prognostic model: least squares of y on X over the control arm. Requires
// n_control > d and a full-rank design; otherwise throws a ValidationError
// directing to the lasso mode.
LinearScoreModel fit_prognostic(const Dataset& ds);

// Lasso variants, glmnet-style: covariates are standardized to unit
// (population) variance internally, the penalized objective is
//   (1/n) * NLL + lambda * ||alpha||_1         (propensity)
//   (1/2n_c) * RSS + lambda * ||theta||_1      (prognostic, control rows)
// and lambda is selected by K-fold cross-validation (mean deviance / MSE),
// ties resolved toward the larger lambda. Fold assignment is seeded; the
// propensity folds are stratified on z.
LinearScoreModel fit_propensity_lasso(const Dataset& ds,
                                      const std::vector<double>& lambda_grid,
                                      int folds, std::uint64_t seed);
LinearScoreModel fit_prognostic_lasso(const Dataset& ds,
                                      const std::vector<double>& lambda_grid,
                                      int folds, std::uint64_t seed);

// Single-lambda coordinate-descent fits on the full data (no CV). Exposed so
// the penalized optima can be verified directly.
LinearScoreModel fit_propensity_lasso_at(const Dataset& ds, double lambda);
LinearScoreModel fit_prognostic_lasso_at(const Dataset& ds, double lambda);

// Smallest lambda at which every penalized coefficient is zero, measured on
// the standardized design the solvers use.
double propensity_lambda_max(const Dataset& ds);
double prognostic_lambda_max(const Dataset& ds);

// Log-spaced grid from lambda_max down to ratio * lambda_max.
std::vector<double> default_lambda_grid(double lambda_max, int size = 100,
                                        double ratio = 1e-3);

// Summed logistic negative log-likelihood of z on [1 | X] at the given
// intercept/slopes, and its analytic gradient (intercept first). These are
// the exact quantities the Newton fit drives below its 1e-8 gradient
// tolerance; exposed so convergence can be audited externally.
double logistic_objective(const Eigen::MatrixXd& X, const Eigen::VectorXi& z,
                          double intercept, const Eigen::VectorXd& coef);
Eigen::VectorXd logistic_gradient(const Eigen::MatrixXd& X,
                                  const Eigen::VectorXi& z, double intercept,
                                  const Eigen::VectorXd& coef);

// e_hat = sigma(intercept + X alpha) clamped to the storage range;
// p_hat = intercept + X theta. Throws on column-count mismatch.
ScoredSample score(const ScoreModel& model, const Eigen::MatrixXd& X_new);

// Column standardization recipe shared by the lasso solvers: subtract the
// mean, divide by the population (1/n) standard deviation. Zero-variance
// columns keep sd 0 and are excluded from penalized updates.
struct Standardized {
  Eigen::MatrixXd X;
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;
};
Standardized standardize_columns(const Eigen::MatrixXd& X);

double sigmoid(double t);

}  // namespace ppcate
