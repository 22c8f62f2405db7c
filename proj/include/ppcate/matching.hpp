#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ppcate/dataset.hpp"
#include "ppcate/score_models.hpp"

namespace ppcate {

// Matching runs in the 2D score space (e_hat, p_hat) with plain Euclidean
// distance. Single-axis modes zero out the other coordinate, which is how the
// propensity-only / prognostic-only baselines are produced.
enum class AxisMode { both, propensity_only, prognostic_only };

enum class MatchAlgo { automatic, kdtree, brute };

struct MatchConfig {
  int k = 0;  // 0 picks default_k(n)
  AxisMode axes = AxisMode::both;
  MatchAlgo algo = MatchAlgo::automatic;
  // Scale p_hat to unit variance before computing distances. Off by default:
  // the distance is deliberately scale-asymmetric (propensity lives in [0,1],
  // prognostic in outcome units).
  bool standardize_p = false;
};

struct MatchResult {
  // neighbor_sets[i]: rows of the k nearest opposite-arm units, ordered by
  // (distance, row index) ascending. Treated units match into the control
  // arm and vice versa; matching is with replacement.
  std::vector<std::vector<int>> neighbor_sets;
  std::vector<std::vector<double>> distances;  // same shape, non-decreasing
  int k_requested = 0;
  int k_treated = 0;  // per-arm k after clamping to the opposite arm size
  int k_control = 0;
  bool clamped = false;
};

double score_distance(double e_i, double p_i, double e_j, double p_j);

// Matched-set size heuristic: round(ln n), floored at 1.
int default_k(int n);

MatchResult match_knn(const Dataset& ds, const ScoredSample& scores,
                      const MatchConfig& cfg = {});

// Proxy individual effects from a matching:
//   y_tilde_i = (2 z_i - 1) * (y_i - mean of matched neighbours' y)
struct ProxyEffects {
  Eigen::VectorXd y_tilde;
  Eigen::VectorXd neighbor_mean;  // counterfactual estimate per unit
};

ProxyEffects proxy_ite(const Dataset& ds, const MatchResult& match);

}  // namespace ppcate
