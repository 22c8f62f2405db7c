#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "ppcate/errors.hpp"
#include "ppcate/rng.hpp"
#include "ppcate/tree.hpp"
#include "support/oracles.hpp"

using namespace ppcate;

namespace {

struct Problem {
  Eigen::MatrixXd F;
  Eigen::VectorXd y;
};

// Piecewise-constant signal over [0,1]^2 plus noise; optional coordinate
// rounding to create duplicate feature values.
Problem random_problem(std::uint64_t seed, int n, bool ties) {
  Rng rng(seed);
  Problem pr;
  pr.F.resize(n, 2);
  pr.y.resize(n);
  for (int i = 0; i < n; ++i) {
    double a = rng.uniform01();
    double b = rng.uniform01();
    if (ties) {
      a = std::round(a * 8.0) / 8.0;
      b = std::round(b * 8.0) / 8.0;
    }
    pr.F(i, 0) = a;
    pr.F(i, 1) = b;
    const double signal = (a < 0.45 ? 1.0 : 0.0) + (b < 0.6 ? 0.5 : 0.0);
    pr.y[i] = signal + 0.3 * rng.normal();
  }
  return pr;
}

void compare_structures(const CateTree& got, int id,
                        const oracle::OracleNode& want) {
  const TreeNode& nd = got.nodes[static_cast<std::size_t>(id)];
  CHECK(nd.n == want.n);
  CHECK(nd.value == doctest::Approx(want.value).epsilon(1e-9));
  REQUIRE(nd.is_leaf() == want.leaf());
  if (!want.leaf()) {
    CHECK(nd.axis == want.axis);
    CHECK(nd.threshold == doctest::Approx(want.threshold).epsilon(1e-12));
    compare_structures(got, nd.left, *want.left);
    compare_structures(got, nd.right, *want.right);
  }
}

}  // namespace

TEST_CASE("greedy growth matches the exhaustive oracle") {
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 30 + (rep * 37) % 171;  // 30..200
    const bool ties = rep % 4 == 0;
    const Problem pr =
        random_problem(500 + static_cast<std::uint64_t>(rep), n, ties);
    GrowConfig cfg;
    cfg.min_node_size = rep % 2 == 0 ? 5 : 10;
    cfg.cp_floor = rep % 3 == 0 ? 0.01 : 0.0;
    const CateTree tree = grow_tree(pr.F, pr.y, cfg);
    const oracle::TreeOracle want(pr.F, pr.y, cfg.min_node_size, cfg.cp_floor);
    compare_structures(tree, 0, want.root());
  }
}

TEST_CASE("growth is invariant to row order") {
  const Problem pr = random_problem(31, 160, true);
  GrowConfig cfg;
  cfg.min_node_size = 7;
  cfg.cp_floor = 0.0;
  const CateTree base = grow_tree(pr.F, pr.y, cfg);

  std::vector<int> perm(160);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(8);
  rng.shuffle(perm);
  Eigen::MatrixXd Fp(160, 2);
  Eigen::VectorXd yp(160);
  for (int i = 0; i < 160; ++i) {
    Fp.row(i) = pr.F.row(perm[static_cast<std::size_t>(i)]);
    yp[i] = pr.y[perm[static_cast<std::size_t>(i)]];
  }
  const CateTree shuffled = grow_tree(Fp, yp, cfg);
  REQUIRE(shuffled.nodes.size() == base.nodes.size());
  for (std::size_t k = 0; k < base.nodes.size(); ++k) {
    CHECK(shuffled.nodes[k].axis == base.nodes[k].axis);
    CHECK(shuffled.nodes[k].threshold == base.nodes[k].threshold);
    CHECK(shuffled.nodes[k].value == base.nodes[k].value);
    CHECK(shuffled.nodes[k].n == base.nodes[k].n);
  }
}

TEST_CASE("split boundary sends equal values left") {
  // 10 units at x=0.2, 10 at x=0.8; threshold lands at 0.5.
  Eigen::MatrixXd F(20, 2);
  Eigen::VectorXd y(20);
  for (int i = 0; i < 20; ++i) {
    F(i, 0) = i < 10 ? 0.2 : 0.8;
    F(i, 1) = 0.0;
    y[i] = i < 10 ? 0.0 : 1.0;
  }
  GrowConfig cfg;
  cfg.min_node_size = 5;
  cfg.cp_floor = 0.0;
  const CateTree tree = grow_tree(F, y, cfg);
  REQUIRE(tree.leaf_count() == 2);
  CHECK(tree.nodes[0].axis == 0);
  CHECK(tree.nodes[0].threshold == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(tree.predict_one(0.5, 0.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(tree.predict_one(0.5 + 1e-9, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("degenerate inputs stay a single leaf") {
  GrowConfig cfg;
  cfg.min_node_size = 5;

  SUBCASE("constant response") {
    Eigen::MatrixXd F = Eigen::MatrixXd::Random(40, 2);
    Eigen::VectorXd y = Eigen::VectorXd::Constant(40, 3.25);
    const CateTree tree = grow_tree(F, y, cfg);
    CHECK(tree.leaf_count() == 1);
    CHECK(tree.nodes[0].value == doctest::Approx(3.25).epsilon(1e-12));
  }
  SUBCASE("too few rows for any split") {
    const Problem pr = random_problem(3, 9, false);  // 9 < 2 * 5
    const CateTree tree = grow_tree(pr.F, pr.y, cfg);
    CHECK(tree.leaf_count() == 1);
  }
  SUBCASE("constant features") {
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(40, 2);
    Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(40, 0.0, 1.0);
    const CateTree tree = grow_tree(F, y, cfg);
    CHECK(tree.leaf_count() == 1);
  }
  SUBCASE("cp floor blocks a weak split") {
    // Strong split at x=0.5 but tiny y contrast: relative reduction ~ 1.
    // With cp_floor just above the achievable fraction, nothing splits.
    Eigen::MatrixXd F(40, 2);
    Eigen::VectorXd y(40);
    Rng rng(12);
    for (int i = 0; i < 40; ++i) {
      F(i, 0) = i < 20 ? 0.25 : 0.75;
      F(i, 1) = rng.uniform01();
      y[i] = (i < 20 ? 0.0 : 0.1) + rng.normal();
    }
    GrowConfig open = cfg, closed = cfg;
    open.cp_floor = 0.0;
    closed.cp_floor = 0.9;
    CHECK(grow_tree(F, y, open).leaf_count() > 1);
    CHECK(grow_tree(F, y, closed).leaf_count() == 1);
  }
}

TEST_CASE("axis restriction confines splits") {
  const Problem pr = random_problem(77, 180, false);
  GrowConfig cfg;
  cfg.min_node_size = 10;
  cfg.cp_floor = 0.0;
  cfg.axes = AxisMode::prognostic_only;
  const CateTree tree = grow_tree(pr.F, pr.y, cfg);
  CHECK(tree.leaf_count() > 1);  // the axis-1 signal is there to find
  for (const TreeNode& nd : tree.nodes)
    if (!nd.is_leaf()) CHECK(nd.axis == 1);
}

TEST_CASE("weakest-link values and pruning on a hand-checked tree") {
  // Left cluster (x<0.5) splits again weakly on axis 1; right is clean.
  Eigen::MatrixXd F(24, 2);
  Eigen::VectorXd y(24);
  for (int i = 0; i < 24; ++i) {
    const bool left = i < 12;
    const bool sub = i % 2 == 0;
    F(i, 0) = left ? 0.2 : 0.8;
    F(i, 1) = sub ? 0.3 : 0.7;
    y[i] = (left ? 0.0 : 10.0) + (left && sub ? 0.5 : 0.0);
  }
  GrowConfig cfg;
  cfg.min_node_size = 6;
  cfg.cp_floor = 0.0;
  const CateTree grown = grow_tree(F, y, cfg);
  REQUIRE(grown.leaf_count() == 3);

  // SSE accounting by hand: root mean 5.125, root SSE 571.125; the inner
  // axis-1 split clears the left child's remaining 0.75.
  CHECK(grown.root_sse == doctest::Approx(571.125).epsilon(1e-12));
  const auto alphas = complexity_sequence(grown);
  REQUIRE(alphas.size() == 2);
  CHECK(alphas[0] == doctest::Approx(0.75 / 571.125).epsilon(1e-12));
  CHECK(alphas[1] == doctest::Approx((571.125 - 0.75) / 571.125).epsilon(1e-12));

  // Pruning just below/above the inner link keeps/removes it.
  CHECK(prune_to(grown, alphas[0] * 0.99).leaf_count() == 3);
  CHECK(prune_to(grown, alphas[0]).leaf_count() == 2);  // g <= cp collapses
  CHECK(prune_to(grown, alphas[1]).leaf_count() == 1);
  CHECK(prune_to(grown, alphas[1]).nodes[0].value ==
        doctest::Approx(y.mean()).epsilon(1e-12));
}

TEST_CASE("cv pruning selects within the candidate grid, deterministically") {
  const Problem pr = random_problem(101, 240, false);
  GrowConfig cfg;
  cfg.min_node_size = 20;
  cfg.cp_floor = 0.0;
  const CateTree grown = grow_tree(pr.F, pr.y, cfg);
  REQUIRE(grown.leaf_count() > 2);

  const CateTree pruned = prune_tree(grown, pr.F, pr.y, 10, 42);
  CHECK(pruned.leaf_count() <= grown.leaf_count());
  REQUIRE_FALSE(pruned.complexity_path.empty());
  CHECK(pruned.complexity_path.front() == cfg.cp_floor);
  for (std::size_t k = 1; k < pruned.complexity_path.size(); ++k)
    CHECK(pruned.complexity_path[k] > pruned.complexity_path[k - 1]);
  CHECK(pruned.cv_error.size() == pruned.complexity_path.size());
  CHECK(pruned.cv_se.size() == pruned.complexity_path.size());
  CHECK(pruned.path_leaves.size() == pruned.complexity_path.size());
  CHECK(pruned.path_leaves.back() == 1);  // largest cp collapses to the root
  bool found = false;
  for (const double c : pruned.complexity_path)
    if (c == pruned.cp_selected) found = true;
  CHECK(found);

  const CateTree again = prune_tree(grown, pr.F, pr.y, 10, 42);
  CHECK(again.cp_selected == pruned.cp_selected);
  CHECK(again.leaf_count() == pruned.leaf_count());
  CHECK(again.cv_error == pruned.cv_error);

  // the one-SE rule can only prune harder
  const CateTree onese =
      prune_tree(grown, pr.F, pr.y, 10, 42, CpRule::one_se);
  CHECK(onese.cp_selected >= pruned.cp_selected);
  CHECK(onese.leaf_count() <= pruned.leaf_count());
}

TEST_CASE("pure-noise response prunes back to the root") {
  Rng rng(6);
  Eigen::MatrixXd F(300, 2);
  Eigen::VectorXd y(300);
  for (int i = 0; i < 300; ++i) {
    F(i, 0) = rng.uniform01();
    F(i, 1) = rng.uniform01();
    y[i] = rng.normal();
  }
  GrowConfig cfg;
  cfg.min_node_size = 20;
  cfg.cp_floor = 0.0;  // let it overgrow on noise
  const CateTree grown = grow_tree(F, y, cfg);
  REQUIRE(grown.leaf_count() > 1);
  const CateTree pruned = prune_tree(grown, F, y, 10, 3, CpRule::one_se);
  CHECK(pruned.leaf_count() == 1);
}

TEST_CASE("prune_tree validates its inputs") {
  const Problem pr = random_problem(2, 60, false);
  GrowConfig cfg;
  cfg.min_node_size = 10;
  const CateTree grown = grow_tree(pr.F, pr.y, cfg);
  CHECK_THROWS_AS(prune_tree(grown, pr.F, pr.y, 1, 0), ValidationError);
  CHECK_THROWS_AS(prune_tree(grown, pr.F, pr.y, 61, 0), ValidationError);
  const Problem other = random_problem(3, 50, false);
  CHECK_THROWS_AS(prune_tree(grown, other.F, other.y, 5, 0), ValidationError);
  CHECK_THROWS_AS(grow_tree(pr.F, Eigen::VectorXd::Zero(10), cfg),
                  ValidationError);
  CateTree empty;
  CHECK_THROWS_AS(prune_to(empty, 0.1), NumericError);
  CHECK_THROWS_AS(empty.predict_one(0.0, 0.0), NumericError);
}

TEST_CASE("effect grid samples cell centers") {
  Eigen::MatrixXd F(20, 2);
  Eigen::VectorXd y(20);
  for (int i = 0; i < 20; ++i) {
    F(i, 0) = i < 10 ? 0.2 : 0.8;
    F(i, 1) = 0.5;
    y[i] = i < 10 ? -1.0 : 1.0;
  }
  GrowConfig cfg;
  cfg.min_node_size = 5;
  const CateTree tree = grow_tree(F, y, cfg);
  REQUIRE(tree.leaf_count() == 2);

  const EffectGrid g = export_grid(tree, 0.0, 1.0, -2.0, 2.0, 4, 2);
  REQUIRE(g.e_centers.size() == 4);
  REQUIRE(g.p_centers.size() == 2);
  CHECK(g.e_centers[0] == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(g.e_centers[3] == doctest::Approx(0.875).epsilon(1e-15));
  CHECK(g.p_centers[0] == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(g.effect(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(g.effect(3, 1) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(export_grid(tree, 0.0, 1.0, -2.0, 2.0, 1, 2),
                  ValidationError);
  CHECK_THROWS_AS(export_grid(tree, 1.0, 0.0, -2.0, 2.0, 4, 2),
                  ValidationError);
}
