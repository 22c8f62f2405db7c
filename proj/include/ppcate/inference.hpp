#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>

#include "ppcate/dataset.hpp"
#include "ppcate/pipeline.hpp"

namespace ppcate {

struct BootstrapResult {
  int B = 0;
  double level = 0.95;
  // per_unit_estimates(i, b): effect for original unit i under the pipeline
  // fitted on resample b.
  Eigen::MatrixXd per_unit_estimates;
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
  double mean_width() const { return (hi - lo).mean(); }
};

// Lower (1-level)/2 and upper 1-(1-level)/2 empirical quantiles of each row,
// inverse-CDF convention: the k-th order statistic with k = ceil(q*B),
// floored at 1.
void percentile_bounds(BootstrapResult& result);

// Fits a pipeline on each of B with-replacement resamples of ds and predicts
// on all original units. Per-resample randomness derives from `seed` with the
// label "bootstrap" and the resample index; a resample with an empty arm is
// redrawn from the same stream (at most 100 retries, then NumericError).
// Resamples run on `threads` workers; column b of the estimate matrix belongs
// to resample b regardless of scheduling.
BootstrapResult bootstrap_ci(const Dataset& ds, const PipelineConfig& cfg,
                             int B = 1000, double level = 0.95,
                             std::uint64_t seed = 0, int threads = 1);

// Same resampling skeleton with a caller-supplied pipeline: fn(resample,
// seed) must return effects for the ORIGINAL units of ds.
using PipelineFn =
    std::function<Eigen::VectorXd(const Dataset& resample, std::uint64_t seed)>;
BootstrapResult bootstrap_ci_with(const Dataset& ds, const PipelineFn& fn,
                                  int B, double level, std::uint64_t seed,
                                  int threads = 1);

// Fraction of units whose true effect lies inside [lo, hi].
double coverage(const BootstrapResult& result, const Eigen::VectorXd& tau_true);

double mse(const Eigen::VectorXd& tau_hat, const Eigen::VectorXd& tau_true);

}  // namespace ppcate
