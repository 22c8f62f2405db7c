#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace ppcate {

// Observational sample: covariates X (n x d), binary treatment z, outcome y.
// tau_true carries the generating treatment effect for simulated data only.
// Treated as immutable after construction; downstream results reference rows
// by index.
struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXi z;
  Eigen::VectorXd y;
  std::optional<Eigen::VectorXd> tau_true;

  int n() const { return static_cast<int>(X.rows()); }
  int d() const { return static_cast<int>(X.cols()); }

  int n_treated() const { return z.sum(); }
  int n_control() const { return n() - n_treated(); }

  std::vector<int> treated_indices() const;
  std::vector<int> control_indices() const;

  // Row-subset copy (bootstrap resamples, CV folds). Indices may repeat.
  Dataset subset(const std::vector<int>& rows) const;
};

// Estimated propensity (e_hat, in (0,1)) and prognostic (p_hat, outcome
// units) scores, aligned with the rows of the dataset they were computed on.
struct ScoredSample {
  Eigen::VectorXd e_hat;
  Eigen::VectorXd p_hat;

  int n() const { return static_cast<int>(e_hat.size()); }
};

struct ValidationReport {
  std::vector<std::string> problems;
  bool ok() const { return problems.empty(); }
};

// Checks the Dataset invariants: n >= 2, d >= 1, consistent lengths, z in
// {0,1} with both arms non-empty, finite X and y. Report-style; never throws.
ValidationReport validate(const Dataset& ds);

// Throws ValidationError listing every problem found.
void require_valid(const Dataset& ds);

struct OverlapReport {
  double eps = 0.0;
  std::vector<int> violating;  // units with e_hat outside [eps, 1-eps]
  bool violated() const { return !violating.empty(); }
};

// Flags units whose estimated propensity leaves no effective overlap, i.e.
// e_hat outside [eps, 1-eps]. eps must lie in (0, 0.5).
OverlapReport check_overlap(const ScoredSample& scores, double eps);

// Propensity estimates are clamped to this range before storage so that
// score distances stay finite under quasi-separation.
inline constexpr double kPropensityClampLo = 1e-6;
inline constexpr double kPropensityClampHi = 1.0 - 1e-6;

}  // namespace ppcate
