#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "ppcate/matching.hpp"

namespace ppcate {

// Binary regression tree over the 2D score space. Internal nodes test
// feature[axis] <= threshold (<= goes left); leaves carry the mean proxy
// effect of their region.
struct TreeNode {
  int axis = -1;  // 0 = propensity, 1 = prognostic, -1 marks a leaf
  double threshold = 0.0;
  double value = 0.0;  // node mean
  double sse = 0.0;    // sum of squared deviations from the node mean
  int n = 0;
  int left = -1;
  int right = -1;
  bool is_leaf() const { return axis < 0; }
};

struct GrowConfig {
  int min_node_size = 20;  // both children must keep at least this many units
  // Minimum SSE reduction, as a fraction of the root SSE, for a split to be
  // kept while growing. Pruning candidates therefore start here.
  double cp_floor = 0.01;
  // Single-axis modes give the 1D baselines: splits are confined to that
  // axis and the other feature column is ignored entirely.
  AxisMode axes = AxisMode::both;
};

struct CateTree {
  std::vector<TreeNode> nodes;  // root at index 0; empty means unfit
  GrowConfig config;            // settings the tree was grown with
  double root_sse = 0.0;
  double cp_selected = 0.0;  // complexity at which the tree was pruned
  // Pruning trace: candidate complexities (ascending; [k] maps to the subtree
  // active on [path[k], path[k+1])), that subtree's leaf count, and the
  // cross-validated error with its standard error.
  std::vector<double> complexity_path;
  std::vector<int> path_leaves;
  std::vector<double> cv_error;
  std::vector<double> cv_se;

  double predict_one(double e, double p) const;
  Eigen::VectorXd predict(const Eigen::MatrixXd& features) const;
  Eigen::VectorXd predict(const ScoredSample& scores) const;
  int leaf_count() const;
  int depth() const;
};

enum class CpRule { min_cv, one_se };

// n x 2 matrix [e_hat p_hat] — the tree's covariates.
Eigen::MatrixXd score_features(const ScoredSample& scores);

// Grow the maximal tree on features (n x 2, columns e_hat / p_hat) under the
// config. Split thresholds are midpoints between adjacent distinct feature
// values; candidate order (axis 0 before 1, lower threshold first) breaks
// exact ties, and per-node scans run over rows sorted by value so the result
// is invariant to input row permutation.
CateTree grow_tree(const Eigen::MatrixXd& features, const Eigen::VectorXd& y,
                   const GrowConfig& cfg = {});
CateTree grow_tree(const ScoredSample& scores, const ProxyEffects& effects,
                   const GrowConfig& cfg = {});

// Smallest subtree optimal at complexity cp (relative to this tree's root
// SSE): collapses every internal node whose per-split SSE gain falls to cp or
// below, bottom-up.
CateTree prune_to(const CateTree& tree, double cp);

// Weakest-link complexity sequence of the grown tree (strictly ascending,
// normalized by root SSE). The first entry collapses the least useful split.
std::vector<double> complexity_sequence(const CateTree& tree);

// K-fold cost-complexity pruning of a tree grown on (features, y). Candidate
// complexities are the grown tree's weakest-link sequence with its cp_floor
// prepended; each fold grows its own tree under the same config and is
// evaluated at the geometric mean of adjacent candidates (the last candidate
// is scored with the fold trees collapsed to their roots). min_cv picks the
// lowest pooled CV error, ties to the larger cp; one_se picks the largest cp
// within one standard error of that minimum.
CateTree prune_tree(const CateTree& grown, const Eigen::MatrixXd& features,
                    const Eigen::VectorXd& y, int folds, std::uint64_t seed,
                    CpRule rule = CpRule::min_cv);
CateTree prune_tree(const CateTree& grown, const ScoredSample& scores,
                    const ProxyEffects& effects, int folds, std::uint64_t seed,
                    CpRule rule = CpRule::min_cv);

// Rectangular raster of the effect surface for heatmap rendering; each cell
// holds the prediction at its center.
struct EffectGrid {
  Eigen::VectorXd e_centers;
  Eigen::VectorXd p_centers;
  Eigen::MatrixXd effect;  // effect(i, j) at (e_centers[i], p_centers[j])
};

EffectGrid export_grid(const CateTree& tree, double e_lo, double e_hi,
                       double p_lo, double p_hi, int e_cells, int p_cells);

}  // namespace ppcate
