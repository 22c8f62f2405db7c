#include "ppcate/pipeline.hpp"

#include "ppcate/errors.hpp"
#include "ppcate/rng.hpp"

namespace ppcate {

CateTree fit_effect_tree(const Dataset& ds, const ScoredSample& scores,
                         const PipelineConfig& cfg, std::uint64_t seed,
                         MatchResult* out_match, ProxyEffects* out_proxy) {
  MatchConfig mc;
  mc.k = cfg.k;
  mc.axes = cfg.axes;
  mc.standardize_p = cfg.standardize_p;
  const MatchResult match = match_knn(ds, scores, mc);
  const ProxyEffects proxy = proxy_ite(ds, match);

  GrowConfig gc;
  gc.min_node_size = cfg.min_node_size;
  gc.cp_floor = cfg.cp_floor;
  gc.axes = cfg.axes;
  const CateTree grown = grow_tree(scores, proxy, gc);
  CateTree pruned = prune_tree(grown, scores, proxy, cfg.folds,
                               derive_seed(seed, "cv-prune"), cfg.cp_rule);

  if (out_match) *out_match = match;
  if (out_proxy) *out_proxy = proxy;
  return pruned;
}

ScoreModel fit_scores(const Dataset& ds, const PipelineConfig& cfg,
                      std::uint64_t seed, bool* lasso_used) {
  require_valid(ds);
  bool lasso = cfg.penalty == PenaltyChoice::lasso;
  if (cfg.penalty == PenaltyChoice::automatic)
    lasso = ds.d() >= ds.n_control();
  if (lasso_used) *lasso_used = lasso;

  ScoreModel scores;
  if (lasso) {
    const auto e_grid = default_lambda_grid(
        propensity_lambda_max(ds), cfg.lambda_grid_size, cfg.lambda_min_ratio);
    const auto p_grid = default_lambda_grid(
        prognostic_lambda_max(ds), cfg.lambda_grid_size, cfg.lambda_min_ratio);
    scores.propensity = fit_propensity_lasso(
        ds, e_grid, cfg.folds, derive_seed(seed, "cv-propensity"));
    scores.prognostic = fit_prognostic_lasso(
        ds, p_grid, cfg.folds, derive_seed(seed, "cv-prognostic"));
  } else {
    scores.propensity = fit_propensity(ds);
    scores.prognostic = fit_prognostic(ds);
  }
  scores.d = ds.d();
  return scores;
}

CateModel fit_cate(const Dataset& ds, const PipelineConfig& cfg,
                   std::uint64_t seed) {
  require_valid(ds);

  CateModel model;
  model.config = cfg;
  model.scores = fit_scores(ds, cfg, seed, &model.lasso_used);
  model.config.penalty =
      model.lasso_used ? PenaltyChoice::lasso : PenaltyChoice::none;

  model.train_scores = score(model.scores, ds.X);
  if (cfg.overlap_eps > 0.0)
    model.overlap = check_overlap(model.train_scores, cfg.overlap_eps);

  model.tree = fit_effect_tree(ds, model.train_scores, cfg, seed,
                               &model.match, &model.proxy);
  model.k_used = model.match.k_requested;
  model.config.k = model.k_used;
  model.tau_hat = model.tree.predict(model.train_scores);
  return model;
}

Eigen::VectorXd predict_cate(const CateModel& model,
                             const Eigen::MatrixXd& X_new) {
  if (model.tree.nodes.empty()) throw NumericError("model has not been fit");
  const ScoredSample s = score(model.scores, X_new);
  return model.tree.predict(s);
}

}  // namespace ppcate
