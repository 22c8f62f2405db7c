#include "ppcate/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ppcate/cv_folds.hpp"
#include "ppcate/errors.hpp"

namespace ppcate {

namespace {

struct Builder {
  const Eigen::MatrixXd& F;
  const Eigen::VectorXd& y;
  GrowConfig cfg;
  double root_sse = 0.0;
  double purity_floor = 0.0;
  std::vector<TreeNode> nodes;

  // Row ids sorted by (F0, F1, y): a canonical order so sums never depend on
  // how the caller happened to order the input.
  std::vector<int> canonical_rows() const {
    std::vector<int> rows(static_cast<std::size_t>(F.rows()));
    std::iota(rows.begin(), rows.end(), 0);
    std::sort(rows.begin(), rows.end(), [&](int a, int b) {
      if (F(a, 0) != F(b, 0)) return F(a, 0) < F(b, 0);
      if (F(a, 1) != F(b, 1)) return F(a, 1) < F(b, 1);
      return y[a] < y[b];
    });
    return rows;
  }

  struct Stats {
    double sum = 0.0, sumsq = 0.0;
    int n = 0;
    double mean() const { return sum / n; }
    double sse() const { return std::max(0.0, sumsq - sum * sum / n); }
  };

  Stats stats_of(const std::vector<int>& rows, int lo, int hi) const {
    Stats s;
    for (int i = lo; i < hi; ++i) {
      const double v = y[rows[static_cast<std::size_t>(i)]];
      s.sum += v;
      s.sumsq += v * v;
      ++s.n;
    }
    return s;
  }

  struct Split {
    double reduction = -1.0;
    int axis = -1;
    double threshold = 0.0;
  };

  bool axis_enabled(int axis) const {
    if (cfg.axes == AxisMode::propensity_only) return axis == 0;
    if (cfg.axes == AxisMode::prognostic_only) return axis == 1;
    return true;
  }

  Split best_split(std::vector<int>& rows, int lo, int hi,
                   const Stats& node) const {
    Split best;
    const int m = hi - lo;
    std::vector<int> order(rows.begin() + lo, rows.begin() + hi);
    for (int axis = 0; axis < 2; ++axis) {
      if (!axis_enabled(axis)) continue;
      const int other = 1 - axis;
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (F(a, axis) != F(b, axis)) return F(a, axis) < F(b, axis);
        if (y[a] != y[b]) return y[a] < y[b];
        return F(a, other) < F(b, other);
      });
      double lsum = 0.0, lsumsq = 0.0;
      for (int i = 1; i < m; ++i) {
        const int r = order[static_cast<std::size_t>(i - 1)];
        lsum += y[r];
        lsumsq += y[r] * y[r];
        if (i < cfg.min_node_size || m - i < cfg.min_node_size) continue;
        const double lv = F(r, axis);
        const double rv = F(order[static_cast<std::size_t>(i)], axis);
        if (!(lv < rv)) continue;
        const double lsse = std::max(0.0, lsumsq - lsum * lsum / i);
        const double rsum = node.sum - lsum;
        const double rsumsq = node.sumsq - lsumsq;
        const double rsse = std::max(0.0, rsumsq - rsum * rsum / (m - i));
        const double reduction = node.sse() - lsse - rsse;
        if (reduction > best.reduction) {
          best.reduction = reduction;
          best.axis = axis;
          best.threshold = lv + 0.5 * (rv - lv);
        }
      }
    }
    return best;
  }

  int build(std::vector<int>& rows, int lo, int hi) {
    const Stats st = stats_of(rows, lo, hi);
    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[static_cast<std::size_t>(id)].value = st.mean();
    nodes[static_cast<std::size_t>(id)].sse = st.sse();
    nodes[static_cast<std::size_t>(id)].n = st.n;

    if (st.n < 2 * cfg.min_node_size) return id;
    if (st.sse() <= purity_floor) return id;

    const Split sp = best_split(rows, lo, hi, st);
    if (sp.axis < 0 || sp.reduction <= 0.0 ||
        sp.reduction < cfg.cp_floor * root_sse)
      return id;

    // Partition in place; children re-sort for their own scans so only the
    // membership matters here.
    const auto mid_it = std::stable_partition(
        rows.begin() + lo, rows.begin() + hi,
        [&](int r) { return F(r, sp.axis) <= sp.threshold; });
    const int mid = static_cast<int>(mid_it - rows.begin());
    const int left = build(rows, lo, mid);
    const int right = build(rows, mid, hi);
    nodes[static_cast<std::size_t>(id)].axis = sp.axis;
    nodes[static_cast<std::size_t>(id)].threshold = sp.threshold;
    nodes[static_cast<std::size_t>(id)].left = left;
    nodes[static_cast<std::size_t>(id)].right = right;
    return id;
  }
};

// Drop unreachable nodes after collapsing, renumbering depth-first.
CateTree compact(const CateTree& tree) {
  CateTree out;
  out.config = tree.config;
  out.root_sse = tree.root_sse;
  out.cp_selected = tree.cp_selected;
  out.complexity_path = tree.complexity_path;
  out.path_leaves = tree.path_leaves;
  out.cv_error = tree.cv_error;
  out.cv_se = tree.cv_se;
  if (tree.nodes.empty()) return out;

  // Recursive copy keeping the original child-after-parent layout.
  struct Copier {
    const CateTree& src;
    CateTree& dst;
    int copy(int id) {
      const int nid = static_cast<int>(dst.nodes.size());
      dst.nodes.push_back(src.nodes[static_cast<std::size_t>(id)]);
      if (!src.nodes[static_cast<std::size_t>(id)].is_leaf()) {
        const int l = copy(src.nodes[static_cast<std::size_t>(id)].left);
        const int r = copy(src.nodes[static_cast<std::size_t>(id)].right);
        dst.nodes[static_cast<std::size_t>(nid)].left = l;
        dst.nodes[static_cast<std::size_t>(nid)].right = r;
      }
      return nid;
    }
  } copier{tree, out};
  copier.copy(0);
  return out;
}

// Postorder walk computing (subtree leaf SSE, leaf count); collapses nodes
// whose weakest-link value g falls at or below cp when `collapse` is set, and
// tracks the minimum g otherwise.
struct LinkWalk {
  std::vector<TreeNode>& nodes;
  double root_sse;
  double cp = 0.0;
  bool collapse = false;
  double min_g = std::numeric_limits<double>::infinity();

  std::pair<double, int> walk(int id) {
    TreeNode& nd = nodes[static_cast<std::size_t>(id)];
    if (nd.is_leaf()) return {nd.sse, 1};
    const auto [ls, ll] = walk(nd.left);
    const auto [rs, rl] = walk(nd.right);
    const double sub_sse = ls + rs;
    const int leaves = ll + rl;
    const double g = (nd.sse - sub_sse) / (leaves - 1) / root_sse;
    if (collapse && g <= cp) {
      nd.axis = -1;
      nd.left = nd.right = -1;
      return {nd.sse, 1};
    }
    min_g = std::min(min_g, g);
    return {sub_sse, leaves};
  }
};

}  // namespace

double CateTree::predict_one(double e, double p) const {
  if (nodes.empty()) throw NumericError("tree has not been fit");
  int id = 0;
  while (!nodes[static_cast<std::size_t>(id)].is_leaf()) {
    const TreeNode& nd = nodes[static_cast<std::size_t>(id)];
    const double v = nd.axis == 0 ? e : p;
    id = v <= nd.threshold ? nd.left : nd.right;
  }
  return nodes[static_cast<std::size_t>(id)].value;
}

Eigen::VectorXd CateTree::predict(const Eigen::MatrixXd& features) const {
  if (features.cols() != 2)
    throw ValidationError("tree features must have 2 columns");
  Eigen::VectorXd out(features.rows());
  for (Eigen::Index i = 0; i < features.rows(); ++i)
    out[i] = predict_one(features(i, 0), features(i, 1));
  return out;
}

Eigen::VectorXd CateTree::predict(const ScoredSample& scores) const {
  return predict(score_features(scores));
}

Eigen::MatrixXd score_features(const ScoredSample& scores) {
  if (scores.e_hat.size() != scores.p_hat.size())
    throw ValidationError("score vectors differ in length");
  Eigen::MatrixXd F(scores.e_hat.size(), 2);
  F.col(0) = scores.e_hat;
  F.col(1) = scores.p_hat;
  return F;
}

int CateTree::leaf_count() const {
  int c = 0;
  for (const TreeNode& nd : nodes)
    if (nd.is_leaf()) ++c;
  return c;
}

int CateTree::depth() const {
  if (nodes.empty()) return 0;
  int best = 0;
  struct Walk {
    const std::vector<TreeNode>& nodes;
    int& best;
    void go(int id, int d) {
      best = std::max(best, d);
      const TreeNode& nd = nodes[static_cast<std::size_t>(id)];
      if (!nd.is_leaf()) {
        go(nd.left, d + 1);
        go(nd.right, d + 1);
      }
    }
  } w{nodes, best};
  w.go(0, 0);
  return best;
}

CateTree grow_tree(const Eigen::MatrixXd& features, const Eigen::VectorXd& y,
                   const GrowConfig& cfg) {
  const int n = static_cast<int>(features.rows());
  if (features.cols() != 2)
    throw ValidationError("tree features must have 2 columns");
  if (y.size() != n) throw ValidationError("feature/response size mismatch");
  if (n < 1) throw ValidationError("empty training set");
  if (cfg.min_node_size < 1) throw ValidationError("min_node_size must be >= 1");
  if (cfg.cp_floor < 0.0) throw ValidationError("cp_floor must be >= 0");
  if (!features.allFinite() || !y.allFinite())
    throw ValidationError("non-finite tree inputs");

  // A single-axis tree must not depend on the other coordinate at all — not
  // even through sort order — so that column is blanked before building.
  Eigen::MatrixXd masked;
  const Eigen::MatrixXd* F = &features;
  if (cfg.axes != AxisMode::both) {
    masked = features;
    masked.col(cfg.axes == AxisMode::propensity_only ? 1 : 0).setZero();
    F = &masked;
  }

  Builder b{*F, y, cfg};
  std::vector<int> rows = b.canonical_rows();
  const Builder::Stats root = b.stats_of(rows, 0, n);
  b.root_sse = root.sse();
  b.purity_floor = 1e-12 * std::max(1.0, root.sumsq);
  b.nodes.reserve(64);
  b.build(rows, 0, n);

  CateTree tree;
  tree.nodes = std::move(b.nodes);
  tree.config = cfg;
  tree.root_sse = b.root_sse;
  return tree;
}

CateTree grow_tree(const ScoredSample& scores, const ProxyEffects& effects,
                   const GrowConfig& cfg) {
  return grow_tree(score_features(scores), effects.y_tilde, cfg);
}

CateTree prune_to(const CateTree& tree, double cp) {
  if (tree.nodes.empty()) throw NumericError("tree has not been fit");
  CateTree copy = tree;
  if (copy.root_sse > 0.0) {
    LinkWalk lw{copy.nodes, copy.root_sse, cp, true};
    lw.walk(0);
  }
  copy.cp_selected = cp;
  return compact(copy);
}

std::vector<double> complexity_sequence(const CateTree& tree) {
  if (tree.nodes.empty()) throw NumericError("tree has not been fit");
  std::vector<double> alphas;
  CateTree cur = tree;
  while (!cur.nodes[0].is_leaf() && cur.root_sse > 0.0) {
    LinkWalk find{cur.nodes, cur.root_sse};
    find.walk(0);
    const double alpha = find.min_g;
    alphas.push_back(alpha);
    LinkWalk cut{cur.nodes, cur.root_sse, alpha, true};
    cut.walk(0);
  }
  return alphas;
}

CateTree prune_tree(const CateTree& grown, const Eigen::MatrixXd& features,
                    const Eigen::VectorXd& y, int folds, std::uint64_t seed,
                    CpRule rule) {
  const int n = static_cast<int>(features.rows());
  if (grown.nodes.empty()) throw NumericError("tree has not been fit");
  if (grown.nodes[0].n != n)
    throw ValidationError("tree was grown on a different sample size");
  if (folds < 2) throw ValidationError("folds must be >= 2");
  if (folds > n) throw ValidationError("folds exceed the number of units");

  const GrowConfig cfg = grown.config;
  if (grown.nodes[0].is_leaf()) {
    CateTree out = grown;
    out.cp_selected = cfg.cp_floor;
    out.complexity_path = {cfg.cp_floor};
    out.path_leaves = {1};
    out.cv_error = {0.0};
    out.cv_se = {0.0};
    return out;
  }

  // Candidates: the floor the tree was grown at, then each weakest-link
  // value. candidates[k] prunes to the subtree optimal on
  // [candidates[k], candidates[k+1]).
  std::vector<double> candidates = {cfg.cp_floor};
  for (const double a : complexity_sequence(grown))
    if (a > candidates.back()) candidates.push_back(a);
  const std::size_t C = candidates.size();

  // Geometric-mean evaluation points; the final interval is open-ended so its
  // fold trees collapse to the root.
  std::vector<double> eval_cp(C);
  for (std::size_t k = 0; k + 1 < C; ++k)
    eval_cp[k] = std::sqrt(candidates[k] * candidates[k + 1]);
  eval_cp[C - 1] = std::numeric_limits<double>::infinity();

  Rng rng(derive_seed(seed, "tree-folds"));
  const std::vector<int> fold_of = assign_folds(n, folds, rng);

  std::vector<std::vector<double>> fold_means(
      static_cast<std::size_t>(folds), std::vector<double>(C, 0.0));
  std::vector<double> pooled(C, 0.0);

  for (int f = 0; f < folds; ++f) {
    std::vector<int> train, test;
    for (int i = 0; i < n; ++i)
      (fold_of[static_cast<std::size_t>(i)] == f ? test : train).push_back(i);
    Eigen::MatrixXd Ftr(train.size(), 2), Fte(test.size(), 2);
    Eigen::VectorXd ytr(train.size()), yte(test.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
      Ftr.row(static_cast<Eigen::Index>(i)) = features.row(train[i]);
      ytr[static_cast<Eigen::Index>(i)] = y[train[i]];
    }
    for (std::size_t i = 0; i < test.size(); ++i) {
      Fte.row(static_cast<Eigen::Index>(i)) = features.row(test[i]);
      yte[static_cast<Eigen::Index>(i)] = y[test[i]];
    }

    const CateTree fold_full = grow_tree(Ftr, ytr, cfg);
    for (std::size_t k = 0; k < C; ++k) {
      const CateTree sub = prune_to(fold_full, eval_cp[k]);
      const double sse = (yte - sub.predict(Fte)).squaredNorm();
      fold_means[static_cast<std::size_t>(f)][k] = sse / yte.size();
      pooled[k] += sse;
    }
  }
  for (auto& v : pooled) v /= n;

  std::vector<double> se(C, 0.0);
  for (std::size_t k = 0; k < C; ++k) {
    double m = 0.0;
    for (int f = 0; f < folds; ++f)
      m += fold_means[static_cast<std::size_t>(f)][k];
    m /= folds;
    double var = 0.0;
    for (int f = 0; f < folds; ++f) {
      const double dlt = fold_means[static_cast<std::size_t>(f)][k] - m;
      var += dlt * dlt;
    }
    var /= folds > 1 ? folds - 1 : 1;
    se[k] = std::sqrt(var / folds);
  }

  // Lowest CV error wins; scanning from the largest cp with a strict
  // comparison sends exact ties to the simpler tree.
  std::size_t best = C - 1;
  for (std::size_t k = C - 1; k-- > 0;)
    if (pooled[k] < pooled[best]) best = k;
  if (rule == CpRule::one_se) {
    const double limit = pooled[best] + se[best];
    for (std::size_t k = C; k-- > 0;)
      if (pooled[k] <= limit) {
        best = k;
        break;
      }
  }

  std::vector<int> path_leaves(C, 0);
  for (std::size_t k = 0; k < C; ++k)
    path_leaves[k] = prune_to(grown, candidates[k]).leaf_count();

  CateTree result = prune_to(grown, candidates[best]);
  result.complexity_path = candidates;
  result.path_leaves = path_leaves;
  result.cv_error = pooled;
  result.cv_se = se;
  result.cp_selected = candidates[best];
  return result;
}

CateTree prune_tree(const CateTree& grown, const ScoredSample& scores,
                    const ProxyEffects& effects, int folds, std::uint64_t seed,
                    CpRule rule) {
  return prune_tree(grown, score_features(scores), effects.y_tilde, folds,
                    seed, rule);
}

EffectGrid export_grid(const CateTree& tree, double e_lo, double e_hi,
                       double p_lo, double p_hi, int e_cells, int p_cells) {
  if (tree.nodes.empty()) throw NumericError("tree has not been fit");
  if (!(e_lo < e_hi) || !(p_lo < p_hi))
    throw ValidationError("empty grid range");
  if (e_cells < 2 || p_cells < 2)
    throw ValidationError("grid resolution must be at least 2 per axis");

  EffectGrid g;
  g.e_centers.resize(e_cells);
  g.p_centers.resize(p_cells);
  const double de = (e_hi - e_lo) / e_cells;
  const double dp = (p_hi - p_lo) / p_cells;
  for (int i = 0; i < e_cells; ++i) g.e_centers[i] = e_lo + (i + 0.5) * de;
  for (int j = 0; j < p_cells; ++j) g.p_centers[j] = p_lo + (j + 0.5) * dp;
  g.effect.resize(e_cells, p_cells);
  for (int i = 0; i < e_cells; ++i)
    for (int j = 0; j < p_cells; ++j)
      g.effect(i, j) = tree.predict_one(g.e_centers[i], g.p_centers[j]);
  return g;
}

}  // namespace ppcate
