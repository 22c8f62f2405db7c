#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "ppcate/errors.hpp"
#include "ppcate/matching.hpp"
#include "ppcate/pipeline.hpp"
#include "ppcate/rng.hpp"
#include "ppcate/simulation.hpp"

using namespace ppcate;

namespace {

Dataset arm_sized_dataset(int n, int n_control, int d, std::uint64_t seed) {
  Rng rng(seed);
  Dataset ds;
  ds.X.resize(n, d);
  ds.z.resize(n);
  ds.y.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) ds.X(i, j) = rng.uniform01();
    ds.z[i] = i < n_control ? 0 : 1;
    ds.y[i] = ds.X(i, 0) + 0.3 * rng.normal();
  }
  return ds;
}

}  // namespace

TEST_CASE("fit_cate populates every stage of the model") {
  ScenarioSpec spec;
  spec.id = 1;
  spec.n = 350;
  spec.d = 3;
  spec.seed = 6;
  const SimulatedData sim = generate(spec);

  PipelineConfig cfg;
  cfg.folds = 5;
  const CateModel model = fit_cate(sim.ds, cfg, 13);

  CHECK(model.scores.d == 3);
  CHECK(model.scores.propensity.coef.size() == 3);
  CHECK(model.scores.propensity.info.converged);
  CHECK(model.scores.prognostic.coef.size() == 3);
  CHECK_FALSE(model.lasso_used);
  CHECK(model.config.penalty == PenaltyChoice::none);

  CHECK(model.train_scores.n() == 350);
  CHECK(model.train_scores.e_hat.minCoeff() > 0.0);
  CHECK(model.train_scores.e_hat.maxCoeff() < 1.0);

  CHECK(model.k_used == default_k(350));
  CHECK(model.config.k == model.k_used);
  CHECK(model.match.k_requested == model.k_used);
  CHECK(model.proxy.y_tilde.size() == 350);
  REQUIRE(model.tree.nodes.size() >= 1);
  CHECK(model.tau_hat.size() == 350);
  CHECK(model.tau_hat.cwiseAbs().maxCoeff() < 50.0);
  CHECK(model.overlap.violating.empty());  // overlap check off by default

  // Training predictions are exactly the tree routed over the train scores.
  const Eigen::VectorXd again = model.tree.predict(model.train_scores);
  CHECK((model.tau_hat - again).cwiseAbs().maxCoeff() == 0.0);

  // predict_cate on the training X reproduces tau_hat bit for bit.
  const Eigen::VectorXd pred = predict_cate(model, sim.ds.X);
  CHECK((pred - model.tau_hat).cwiseAbs().maxCoeff() == 0.0);

  // New units route to finite leaf effects.
  Eigen::MatrixXd X_new = Eigen::MatrixXd::Constant(4, 3, 0.5);
  X_new(1, 0) = 0.0;
  X_new(2, 2) = 1.0;
  const Eigen::VectorXd out = predict_cate(model, X_new);
  REQUIRE(out.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(std::isfinite(out[i]));
}

TEST_CASE("fit_cate is a pure function of data, config and seed") {
  ScenarioSpec spec;
  spec.id = 6;
  spec.n = 220;
  spec.d = 2;
  spec.seed = 40;
  const SimulatedData sim = generate(spec);
  PipelineConfig cfg;
  cfg.folds = 5;

  const CateModel a = fit_cate(sim.ds, cfg, 3);
  const CateModel b = fit_cate(sim.ds, cfg, 3);
  CHECK((a.tau_hat - b.tau_hat).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.train_scores.e_hat - b.train_scores.e_hat).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK(a.tree.nodes.size() == b.tree.nodes.size());
}

TEST_CASE("explicit K overrides the sample-size default") {
  ScenarioSpec spec;
  spec.id = 1;
  spec.n = 200;
  spec.d = 2;
  spec.seed = 2;
  const SimulatedData sim = generate(spec);
  PipelineConfig cfg;
  cfg.folds = 5;
  cfg.k = 3;
  const CateModel model = fit_cate(sim.ds, cfg, 1);
  CHECK(model.k_used == 3);
  CHECK(model.match.k_requested == 3);
}

TEST_CASE("automatic penalty trips exactly at d >= n_control") {
  const int d = 5;

  bool lasso_used = true;
  PipelineConfig cfg;
  cfg.folds = 3;
  // 6 controls, 5 covariates: least squares still identified.
  const Dataset wide_ok = arm_sized_dataset(24, d + 1, d, 5);
  fit_scores(wide_ok, cfg, 1, &lasso_used);
  CHECK_FALSE(lasso_used);

  // 5 controls: automatic switches to the lasso.
  const Dataset too_wide = arm_sized_dataset(24, d, d, 5);
  const ScoreModel m = fit_scores(too_wide, cfg, 1, &lasso_used);
  CHECK(lasso_used);
  CHECK(m.propensity.penalty == PenaltyMode::lasso);
  CHECK(m.prognostic.penalty == PenaltyMode::lasso);
  CHECK(m.prognostic.cv.selected >= 0);

  // Forcing the penalty is honored in both directions.
  cfg.penalty = PenaltyChoice::lasso;
  fit_scores(wide_ok, cfg, 1, &lasso_used);
  CHECK(lasso_used);
  cfg.penalty = PenaltyChoice::none;
  CHECK_THROWS_AS(fit_scores(too_wide, cfg, 1, &lasso_used), ValidationError);
}

TEST_CASE("overlap audit is opt-in and reports extreme units") {
  ScenarioSpec spec;
  spec.id = 1;
  spec.n = 260;
  spec.d = 2;
  spec.seed = 9;
  const SimulatedData sim = generate(spec);

  PipelineConfig cfg;
  cfg.folds = 5;
  cfg.overlap_eps = 0.45;  // absurdly strict: most units must violate
  const CateModel strict = fit_cate(sim.ds, cfg, 1);
  CHECK(strict.overlap.eps == 0.45);
  CHECK(strict.overlap.violated());
  for (const int i : strict.overlap.violating) {
    const double e = strict.train_scores.e_hat[i];
    CHECK((e < 0.45 || e > 0.55));
  }

  cfg.overlap_eps = 0.0;
  const CateModel off = fit_cate(sim.ds, cfg, 1);
  CHECK_FALSE(off.overlap.violated());
  CHECK(off.overlap.eps == 0.0);
}

TEST_CASE("one-standard-error pruning never keeps more leaves") {
  ScenarioSpec spec;
  spec.id = 1;
  spec.n = 300;
  spec.d = 2;
  spec.seed = 14;
  const SimulatedData sim = generate(spec);
  PipelineConfig cfg;
  cfg.folds = 5;

  const CateModel min_cv = fit_cate(sim.ds, cfg, 8);
  cfg.cp_rule = CpRule::one_se;
  const CateModel one_se = fit_cate(sim.ds, cfg, 8);
  CHECK(one_se.tree.leaf_count() <= min_cv.tree.leaf_count());
}

TEST_CASE("predict refuses an unfitted model") {
  const CateModel empty;
  CHECK_THROWS_AS(predict_cate(empty, Eigen::MatrixXd::Zero(2, 2)),
                  NumericError);
}

TEST_CASE("pipeline rejects invalid data up front") {
  Dataset bad;
  bad.X = Eigen::MatrixXd::Zero(4, 1);
  bad.z = Eigen::VectorXi::Zero(4);  // single arm
  bad.y = Eigen::VectorXd::Zero(4);
  PipelineConfig cfg;
  CHECK_THROWS_AS(fit_cate(bad, cfg, 0), ValidationError);
  CHECK_THROWS_AS(fit_scores(bad, cfg, 0), ValidationError);
}
