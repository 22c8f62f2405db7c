#include "ppcate/score_models.hpp"

#include <cmath>
#include <string>

#include "ppcate/errors.hpp"

namespace ppcate {

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

namespace {

// Stable per-unit negative Bernoulli log-likelihood, label in {0,1}.
double nll_term(double eta, double z) {
  if (eta > 0.0) return (1.0 - z) * eta + std::log1p(std::exp(-eta));
  return -z * eta + std::log1p(std::exp(eta));
}

struct LogisticProblem {
  const Eigen::MatrixXd& A;  // [1 | X]
  const Eigen::VectorXd& z;
  double ridge = 0.0;  // on slopes only

  double objective(const Eigen::VectorXd& beta) const {
    const Eigen::VectorXd eta = A * beta;
    double obj = 0.0;
    for (int i = 0; i < eta.size(); ++i) obj += nll_term(eta[i], z[i]);
    if (ridge > 0.0)
      obj += ridge * beta.tail(beta.size() - 1).squaredNorm();
    return obj;
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& beta) const {
    const Eigen::VectorXd eta = A * beta;
    Eigen::VectorXd mu(eta.size());
    for (int i = 0; i < eta.size(); ++i) mu[i] = sigmoid(eta[i]);
    Eigen::VectorXd g = A.transpose() * (mu - z);
    if (ridge > 0.0)
      g.tail(g.size() - 1) += 2.0 * ridge * beta.tail(beta.size() - 1);
    return g;
  }
};

constexpr double kGradTol = 1e-8;
constexpr int kMaxNewtonIters = 100;
constexpr double kSeparationEta = 30.0;
constexpr double kSeparationFrac = 0.10;
constexpr double kStabilizingRidge = 1e-6;

// Damped Newton on the (optionally ridge-stabilized) logistic objective.
// Returns false when a separation restart is requested.
bool run_newton(const LogisticProblem& prob, Eigen::VectorXd& beta,
                FitInfo& info, bool allow_separation_restart) {
  const int n = static_cast<int>(prob.A.rows());
  const int p = static_cast<int>(prob.A.cols());
  double obj = prob.objective(beta);
  info.objective_path.clear();
  info.objective_path.push_back(obj);
  info.iterations = 0;
  info.converged = false;

  for (int iter = 0; iter < kMaxNewtonIters; ++iter) {
    const Eigen::VectorXd eta = prob.A * beta;
    if (allow_separation_restart) {
      int extreme = 0;
      for (int i = 0; i < n; ++i)
        if (std::abs(eta[i]) > kSeparationEta) ++extreme;
      if (extreme >= static_cast<int>(std::ceil(kSeparationFrac * n)) &&
          extreme > 0)
        return false;  // caller restarts with the stabilizing ridge
    }

    const Eigen::VectorXd g = prob.gradient(beta);
    if (g.lpNorm<Eigen::Infinity>() < kGradTol) {
      info.converged = true;
      return true;
    }

    Eigen::VectorXd w(n);
    for (int i = 0; i < n; ++i) {
      const double mu = sigmoid(eta[i]);
      w[i] = std::max(mu * (1.0 - mu), 1e-10);
    }
    Eigen::MatrixXd H =
        prob.A.transpose() * w.asDiagonal() * prob.A;
    if (prob.ridge > 0.0)
      H.diagonal().tail(p - 1).array() += 2.0 * prob.ridge;

    Eigen::VectorXd step = H.ldlt().solve(-g);
    if (!step.allFinite()) {
      if (allow_separation_restart) return false;
      break;
    }

    // Step halving keeps the objective non-increasing up to rounding. The
    // slack matters in the endgame: once the Newton decrement drops below the
    // objective's floating-point resolution, a strict comparison rejects the
    // (true-descent) full step on noise and the iteration stalls with the
    // gradient stuck above its tolerance. Accepting within rounding lets the
    // final full steps run, and those contract the gradient quadratically.
    const double slack = 1e-10 * (1.0 + std::abs(obj));
    double t = 1.0;
    double new_obj = prob.objective(beta + t * step);
    int halvings = 0;
    while (!(new_obj <= obj + slack) && halvings < 60) {
      t *= 0.5;
      new_obj = prob.objective(beta + t * step);
      ++halvings;
    }
    if (!(new_obj <= obj + slack)) break;  // no descent direction left

    beta += t * step;
    obj = new_obj;
    info.objective_path.push_back(obj);
    info.iterations = iter + 1;
  }
  return true;
}

}  // namespace

LinearScoreModel fit_propensity(const Dataset& ds) {
  require_valid(ds);
  const int n = ds.n();
  const int d = ds.d();
  Eigen::MatrixXd A(n, d + 1);
  A.col(0).setOnes();
  A.rightCols(d) = ds.X;
  const Eigen::VectorXd z = ds.z.cast<double>();

  LinearScoreModel m;
  m.penalty = PenaltyMode::none;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d + 1);

  LogisticProblem prob{A, z, 0.0};
  const bool finished = run_newton(prob, beta, m.info, true);
  if (!finished) {
    // Quasi-separation: refit with a tiny ridge so the optimum is bounded.
    m.info.separation = true;
    m.info.ridge_stabilized = true;
    beta.setZero();
    LogisticProblem stabilized{A, z, kStabilizingRidge};
    run_newton(stabilized, beta, m.info, false);
  }

  m.intercept = beta[0];
  m.coef = beta.tail(d);
  return m;
}

LinearScoreModel fit_prognostic(const Dataset& ds) {
  require_valid(ds);
  const int d = ds.d();
  const auto rows = ds.control_indices();
  const int nc = static_cast<int>(rows.size());
  if (nc <= d)
    throw ValidationError(
        "unpenalized prognostic fit needs n_control > d (" +
        std::to_string(nc) + " control units, d = " + std::to_string(d) +
        "); use the lasso mode");

  Eigen::MatrixXd A(nc, d + 1);
  Eigen::VectorXd yc(nc);
  for (int r = 0; r < nc; ++r) {
    A(r, 0) = 1.0;
    A.row(r).tail(d) = ds.X.row(rows[static_cast<std::size_t>(r)]);
    yc[r] = ds.y[rows[static_cast<std::size_t>(r)]];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (qr.rank() < d + 1)
    throw ValidationError(
        "rank-deficient control design (collinear covariates); use the lasso "
        "mode");
  const Eigen::VectorXd theta = qr.solve(yc);

  LinearScoreModel m;
  m.penalty = PenaltyMode::none;
  m.intercept = theta[0];
  m.coef = theta.tail(d);
  m.info.converged = true;
  m.info.iterations = 1;
  return m;
}

namespace {

Eigen::VectorXd pack_beta(double intercept, const Eigen::VectorXd& coef) {
  Eigen::VectorXd beta(coef.size() + 1);
  beta[0] = intercept;
  beta.tail(coef.size()) = coef;
  return beta;
}

Eigen::MatrixXd with_intercept_column(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd A(X.rows(), X.cols() + 1);
  A.col(0).setOnes();
  A.rightCols(X.cols()) = X;
  return A;
}

}  // namespace

double logistic_objective(const Eigen::MatrixXd& X, const Eigen::VectorXi& z,
                          double intercept, const Eigen::VectorXd& coef) {
  const Eigen::MatrixXd A = with_intercept_column(X);
  const Eigen::VectorXd zd = z.cast<double>();
  return LogisticProblem{A, zd, 0.0}.objective(pack_beta(intercept, coef));
}

Eigen::VectorXd logistic_gradient(const Eigen::MatrixXd& X,
                                  const Eigen::VectorXi& z, double intercept,
                                  const Eigen::VectorXd& coef) {
  const Eigen::MatrixXd A = with_intercept_column(X);
  const Eigen::VectorXd zd = z.cast<double>();
  return LogisticProblem{A, zd, 0.0}.gradient(pack_beta(intercept, coef));
}

ScoredSample score(const ScoreModel& model, const Eigen::MatrixXd& X_new) {
  if (static_cast<int>(X_new.cols()) != model.d)
    throw ValidationError("covariate count mismatch: model has d = " +
                          std::to_string(model.d) + ", input has " +
                          std::to_string(X_new.cols()) + " columns");
  const int m = static_cast<int>(X_new.rows());
  ScoredSample s;
  s.e_hat.resize(m);
  s.p_hat.resize(m);
  const Eigen::VectorXd eta =
      (X_new * model.propensity.coef).array() + model.propensity.intercept;
  for (int i = 0; i < m; ++i)
    s.e_hat[i] = std::clamp(sigmoid(eta[i]), kPropensityClampLo,
                            kPropensityClampHi);
  s.p_hat = (X_new * model.prognostic.coef).array() + model.prognostic.intercept;
  return s;
}

Standardized standardize_columns(const Eigen::MatrixXd& X) {
  const int n = static_cast<int>(X.rows());
  const int d = static_cast<int>(X.cols());
  Standardized s;
  s.X.resize(n, d);
  s.mean.resize(d);
  s.sd.resize(d);
  for (int j = 0; j < d; ++j) {
    const double m = X.col(j).mean();
    const double var = (X.col(j).array() - m).square().sum() / n;
    const double sd = std::sqrt(var);
    s.mean[j] = m;
    s.sd[j] = sd;
    if (sd > 0.0)
      s.X.col(j) = (X.col(j).array() - m) / sd;
    else
      s.X.col(j).setZero();  // constant column, excluded from penalization
  }
  return s;
}

}  // namespace ppcate
