#include "ppcate/inference.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ppcate/errors.hpp"
#include "ppcate/parallel.hpp"
#include "ppcate/rng.hpp"

namespace ppcate {

namespace {

constexpr int kMaxRedraws = 100;

// Inverse-empirical-CDF (type 1) quantile of a sorted sample.
double sorted_quantile(const std::vector<double>& sorted, double q) {
  const int B = static_cast<int>(sorted.size());
  const int k = std::max(1, static_cast<int>(std::ceil(q * B)));
  return sorted[static_cast<std::size_t>(std::min(k, B) - 1)];
}

}  // namespace

void percentile_bounds(BootstrapResult& result) {
  const int n = static_cast<int>(result.per_unit_estimates.rows());
  const int B = static_cast<int>(result.per_unit_estimates.cols());
  if (B < 2) throw ValidationError("need at least 2 resamples");
  if (!(result.level > 0.0 && result.level < 1.0))
    throw ValidationError("level must lie in (0, 1)");
  result.lo.resize(n);
  result.hi.resize(n);
  const double q_lo = (1.0 - result.level) / 2.0;
  const double q_hi = 1.0 - q_lo;
  std::vector<double> row(static_cast<std::size_t>(B));
  for (int i = 0; i < n; ++i) {
    for (int b = 0; b < B; ++b)
      row[static_cast<std::size_t>(b)] = result.per_unit_estimates(i, b);
    std::sort(row.begin(), row.end());
    result.lo[i] = sorted_quantile(row, q_lo);
    result.hi[i] = sorted_quantile(row, q_hi);
  }
}

BootstrapResult bootstrap_ci_with(const Dataset& ds, const PipelineFn& fn,
                                  int B, double level, std::uint64_t seed,
                                  int threads) {
  require_valid(ds);
  if (B < 2) throw ValidationError("need at least 2 resamples");
  if (!(level > 0.0 && level < 1.0))
    throw ValidationError("level must lie in (0, 1)");

  const int n = ds.n();
  BootstrapResult result;
  result.B = B;
  result.level = level;
  result.per_unit_estimates.resize(n, B);

  parallel_for(B, threads, [&](int b) {
    const std::uint64_t sub = derive_seed(seed, "bootstrap", b);
    Rng rng(derive_seed(sub, "resample"));
    std::vector<int> rows;
    for (int attempt = 0;; ++attempt) {
      if (attempt > kMaxRedraws)
        throw NumericError(
            "bootstrap resample kept drawing a single-arm sample");
      rows = rng.sample_with_replacement(n, n);
      int treated = 0;
      for (const int r : rows) treated += ds.z[r];
      if (treated > 0 && treated < n) break;
    }
    const Dataset resample = ds.subset(rows);
    result.per_unit_estimates.col(b) = fn(resample, derive_seed(sub, "fit"));
  });

  percentile_bounds(result);
  return result;
}

BootstrapResult bootstrap_ci(const Dataset& ds, const PipelineConfig& cfg,
                             int B, double level, std::uint64_t seed,
                             int threads) {
  const PipelineFn fn = [&ds, &cfg](const Dataset& resample,
                                    std::uint64_t sub) {
    // cfg.k == 0 stays automatic, so K is recomputed from the resample size.
    const CateModel model = fit_cate(resample, cfg, sub);
    return predict_cate(model, ds.X);
  };
  return bootstrap_ci_with(ds, fn, B, level, seed, threads);
}

double coverage(const BootstrapResult& result,
                const Eigen::VectorXd& tau_true) {
  const int n = static_cast<int>(result.lo.size());
  if (tau_true.size() != n)
    throw ValidationError("tau_true length does not match the intervals");
  if (n == 0) throw ValidationError("empty bootstrap result");
  int inside = 0;
  for (int i = 0; i < n; ++i)
    if (result.lo[i] <= tau_true[i] && tau_true[i] <= result.hi[i]) ++inside;
  return static_cast<double>(inside) / n;
}

double mse(const Eigen::VectorXd& tau_hat, const Eigen::VectorXd& tau_true) {
  if (tau_hat.size() != tau_true.size())
    throw ValidationError("mse inputs differ in length");
  if (tau_hat.size() == 0) throw ValidationError("mse of empty vectors");
  return (tau_hat - tau_true).squaredNorm() / tau_hat.size();
}

}  // namespace ppcate
