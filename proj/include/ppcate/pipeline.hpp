#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "ppcate/dataset.hpp"
#include "ppcate/matching.hpp"
#include "ppcate/score_models.hpp"
#include "ppcate/tree.hpp"

namespace ppcate {

// automatic switches to the lasso score fits when the control arm is too
// small for least squares (n_control <= d).
enum class PenaltyChoice { automatic, none, lasso };

struct PipelineConfig {
  int k = 0;  // matched-set size; 0 resolves to default_k(n)
  int min_node_size = 20;
  double cp_floor = 0.01;
  CpRule cp_rule = CpRule::min_cv;
  PenaltyChoice penalty = PenaltyChoice::automatic;
  int folds = 10;                  // CV folds for lambda and cp selection
  AxisMode axes = AxisMode::both;  // single-axis modes give the baselines
  bool standardize_p = false;      // scale p_hat to unit variance in distances
  double overlap_eps = 0.0;        // >0 records propensity overlap violations
  int lambda_grid_size = 100;
  double lambda_min_ratio = 1e-3;
};

// A fully fitted estimator: score models, the training matching and proxy
// effects, and the pruned effect tree.
struct CateModel {
  ScoreModel scores;
  ScoredSample train_scores;
  MatchResult match;
  ProxyEffects proxy;
  CateTree tree;
  Eigen::VectorXd tau_hat;  // predictions on the training units
  PipelineConfig config;    // as resolved (k and penalty made concrete)
  int k_used = 0;
  bool lasso_used = false;
  OverlapReport overlap;  // populated when config.overlap_eps > 0
};

// The score-fitting half of the pipeline: resolves PenaltyChoice::automatic
// against the control-arm size, then fits both models (CV lambda selection
// in lasso mode, seeded with labels "cv-propensity" / "cv-prognostic").
ScoreModel fit_scores(const Dataset& ds, const PipelineConfig& cfg,
                      std::uint64_t seed, bool* lasso_used = nullptr);

// Matching + proxy effects + grown and CV-pruned tree on externally supplied
// scores. Lets callers share one score fit across several trees (baselines,
// K sweeps). out_match / out_proxy receive intermediates when non-null.
CateTree fit_effect_tree(const Dataset& ds, const ScoredSample& scores,
                         const PipelineConfig& cfg, std::uint64_t seed,
                         MatchResult* out_match = nullptr,
                         ProxyEffects* out_proxy = nullptr);

// The full estimator on one dataset. Sub-seeds for the three CV stages are
// derived from `seed` with the labels "cv-propensity", "cv-prognostic" and
// "cv-prune", so a single seed reproduces the entire fit.
CateModel fit_cate(const Dataset& ds, const PipelineConfig& cfg,
                   std::uint64_t seed);

// Effects for new units: score with the fitted models, route down the tree.
Eigen::VectorXd predict_cate(const CateModel& model,
                             const Eigen::MatrixXd& X_new);

}  // namespace ppcate
