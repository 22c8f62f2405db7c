#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "ppcate/dataset.hpp"
#include "ppcate/errors.hpp"
#include "ppcate/inference.hpp"
#include "ppcate/rng.hpp"

using namespace ppcate;

namespace {

Dataset tiny_dataset(int n, std::uint64_t seed, int treated_every = 2) {
  Rng rng(seed);
  Dataset ds;
  ds.X.resize(n, 1);
  ds.z.resize(n);
  ds.y.resize(n);
  for (int i = 0; i < n; ++i) {
    ds.X(i, 0) = rng.uniform01();
    ds.z[i] = i % treated_every == 0 ? 1 : 0;
    ds.y[i] = rng.normal();
  }
  return ds;
}

}  // namespace

TEST_CASE("percentile bounds use the ceil(q*B) order statistic") {
  BootstrapResult r;
  r.B = 8;
  r.per_unit_estimates.resize(1, 8);
  r.per_unit_estimates << 30, 10, 80, 40, 20, 70, 50, 60;

  r.level = 0.5;  // q = 0.25 / 0.75 -> 2nd and 6th order statistics
  percentile_bounds(r);
  CHECK(r.lo[0] == 20.0);
  CHECK(r.hi[0] == 60.0);

  r.level = 0.95;  // ceil(0.2)=1 -> min, ceil(7.8)=8 -> max
  percentile_bounds(r);
  CHECK(r.lo[0] == 10.0);
  CHECK(r.hi[0] == 80.0);

  r.level = 0.9999;  // floor at the 1st order statistic
  percentile_bounds(r);
  CHECK(r.lo[0] == 10.0);
  CHECK(r.hi[0] == 80.0);
}

TEST_CASE("interval width grows with the level") {
  Rng rng(3);
  BootstrapResult r;
  r.B = 40;
  r.per_unit_estimates.resize(5, 40);
  for (int i = 0; i < 5; ++i)
    for (int b = 0; b < 40; ++b) r.per_unit_estimates(i, b) = rng.normal();
  r.level = 0.8;
  percentile_bounds(r);
  const double narrow = r.mean_width();
  r.level = 0.99;
  percentile_bounds(r);
  CHECK(r.mean_width() >= narrow);
  for (int i = 0; i < 5; ++i) CHECK(r.lo[i] <= r.hi[i]);
}

TEST_CASE("percentile bounds validate their inputs") {
  BootstrapResult r;
  r.B = 1;
  r.per_unit_estimates.resize(1, 1);
  r.level = 0.95;
  CHECK_THROWS_AS(percentile_bounds(r), ValidationError);
  r.B = 4;
  r.per_unit_estimates.resize(1, 4);
  r.level = 1.0;
  CHECK_THROWS_AS(percentile_bounds(r), ValidationError);
  r.level = 0.0;
  CHECK_THROWS_AS(percentile_bounds(r), ValidationError);
}

TEST_CASE("resampling skeleton: seed labels, column order, arm guarantee") {
  const Dataset ds = tiny_dataset(30, 5, 3);
  const std::uint64_t master = 77;
  const int B = 12;

  // The stub pipeline reports its seed argument, so the estimate matrix
  // records exactly which derived seed reached which column.
  const PipelineFn fn = [&](const Dataset& resample, std::uint64_t seed) {
    REQUIRE(resample.n() == ds.n());
    REQUIRE(resample.n_treated() > 0);
    REQUIRE(resample.n_control() > 0);
    return Eigen::VectorXd::Constant(ds.n(),
                                     static_cast<double>(seed % 100000));
  };
  const BootstrapResult r = bootstrap_ci_with(ds, fn, B, 0.95, master);
  CHECK(r.B == B);
  for (int b = 0; b < B; ++b) {
    const std::uint64_t sub = derive_seed(master, "bootstrap",
                                          static_cast<std::uint64_t>(b));
    const double want =
        static_cast<double>(derive_seed(sub, "fit") % 100000);
    CHECK(r.per_unit_estimates(0, b) == want);
  }

  // Same skeleton on two workers: identical output, any scheduling.
  const BootstrapResult r2 = bootstrap_ci_with(ds, fn, B, 0.95, master, 2);
  CHECK((r2.per_unit_estimates - r.per_unit_estimates).cwiseAbs().maxCoeff() ==
        0.0);
}

TEST_CASE("degenerate stub pipelines give degenerate intervals") {
  const Dataset ds = tiny_dataset(20, 9);
  const PipelineFn zero = [&](const Dataset&, std::uint64_t) {
    return Eigen::VectorXd::Zero(ds.n());
  };
  const BootstrapResult r = bootstrap_ci_with(ds, zero, 16, 0.95, 1);
  CHECK(r.mean_width() == 0.0);
  CHECK(coverage(r, Eigen::VectorXd::Zero(ds.n())) == 1.0);
  CHECK(coverage(r, Eigen::VectorXd::Constant(ds.n(), 0.5)) == 0.0);
  Eigen::VectorXd half = Eigen::VectorXd::Zero(ds.n());
  for (int i = 0; i < ds.n() / 2; ++i) half[i] = 2.0;
  CHECK(coverage(r, half) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("full pipeline bootstrap is seeded and reproducible") {
  Rng rng(10);
  const int n = 80;
  Dataset ds;
  ds.X.resize(n, 2);
  ds.z.resize(n);
  ds.y.resize(n);
  for (int i = 0; i < n; ++i) {
    ds.X(i, 0) = rng.uniform01();
    ds.X(i, 1) = rng.uniform01();
    ds.z[i] = rng.bernoulli(0.5) ? 1 : 0;
    ds.y[i] = ds.X(i, 0) + (ds.z[i] == 1 ? 1.0 : 0.0) + 0.2 * rng.normal();
  }
  ds.z[0] = 1;
  ds.z[1] = 0;

  PipelineConfig cfg;
  cfg.folds = 5;
  const BootstrapResult a = bootstrap_ci(ds, cfg, 8, 0.9, 4);
  const BootstrapResult b = bootstrap_ci(ds, cfg, 8, 0.9, 4);
  CHECK((a.per_unit_estimates - b.per_unit_estimates).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK((a.lo - b.lo).cwiseAbs().maxCoeff() == 0.0);

  const BootstrapResult c = bootstrap_ci(ds, cfg, 8, 0.9, 5);
  CHECK((a.per_unit_estimates - c.per_unit_estimates).cwiseAbs().maxCoeff() >
        0.0);

  CHECK_THROWS_AS(bootstrap_ci(ds, cfg, 1, 0.9, 4), ValidationError);
  CHECK_THROWS_AS(bootstrap_ci(ds, cfg, 8, 1.2, 4), ValidationError);
}

TEST_CASE("coverage and mse scalar conventions") {
  BootstrapResult r;
  r.B = 2;
  r.lo.resize(3);
  r.hi.resize(3);
  r.lo << 0.0, -1.0, 2.0;
  r.hi << 1.0, 1.0, 3.0;
  Eigen::VectorXd tau(3);
  tau << 0.5, -2.0, 2.0;  // inside, below, on the boundary
  CHECK(coverage(r, tau) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  Eigen::VectorXd wrong(2);
  CHECK_THROWS_AS(coverage(r, wrong), ValidationError);

  Eigen::VectorXd a(4), b(4);
  a << 1, 2, 3, 4;
  b << 1, 2, 5, 0;
  CHECK(mse(a, b) == doctest::Approx((4.0 + 16.0) / 4.0).epsilon(1e-12));
  CHECK_THROWS_AS(mse(a, wrong), ValidationError);
}
