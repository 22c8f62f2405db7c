#include "ppcate/matching.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ppcate/errors.hpp"

namespace ppcate {

namespace {

constexpr int kBruteForceBelow = 64;  // opposite-arm size cutoff

struct Neighbor {
  double d2;
  int row;
  bool operator<(const Neighbor& o) const {
    return d2 != o.d2 ? d2 < o.d2 : row < o.row;
  }
};

struct Pt {
  double c[2];
  int row;
};

double dist2(const double* a, const Pt& b) {
  const double de = a[0] - b.c[0];
  const double dp = a[1] - b.c[1];
  return de * de + dp * dp;
}

// kd-tree over 2D points, implicit median layout (node = midpoint of its
// range, axes cycled by depth). The result of a query is independent of the
// tree shape because candidates carry a total order (d2, row).
class KdTree {
 public:
  explicit KdTree(std::vector<Pt> pts) : pts_(std::move(pts)) {
    build(0, static_cast<int>(pts_.size()), 0);
  }

  void query(const double q[2], int k, std::vector<Neighbor>& heap) const {
    heap.clear();
    search(q, k, 0, static_cast<int>(pts_.size()), 0, heap);
    std::sort(heap.begin(), heap.end());
  }

 private:
  void build(int lo, int hi, int depth) {
    if (hi - lo <= 1) return;
    const int axis = depth % 2;
    const int mid = (lo + hi) / 2;
    std::nth_element(pts_.begin() + lo, pts_.begin() + mid, pts_.begin() + hi,
                     [axis](const Pt& a, const Pt& b) {
                       return a.c[axis] != b.c[axis] ? a.c[axis] < b.c[axis]
                                                     : a.row < b.row;
                     });
    build(lo, mid, depth + 1);
    build(mid + 1, hi, depth + 1);
  }

  void offer(const double q[2], int k, const Pt& p,
             std::vector<Neighbor>& heap) const {
    const Neighbor cand{dist2(q, p), p.row};
    if (static_cast<int>(heap.size()) < k) {
      heap.push_back(cand);
      std::push_heap(heap.begin(), heap.end());
    } else if (cand < heap.front()) {
      std::pop_heap(heap.begin(), heap.end());
      heap.back() = cand;
      std::push_heap(heap.begin(), heap.end());
    }
  }

  void search(const double q[2], int k, int lo, int hi, int depth,
              std::vector<Neighbor>& heap) const {
    if (lo >= hi) return;
    const int mid = (lo + hi) / 2;
    offer(q, k, pts_[static_cast<std::size_t>(mid)], heap);
    if (hi - lo == 1) return;
    const int axis = depth % 2;
    const double delta = q[axis] - pts_[static_cast<std::size_t>(mid)].c[axis];
    const bool left_first = delta < 0.0;
    const auto visit = [&](bool left) {
      if (left)
        search(q, k, lo, mid, depth + 1, heap);
      else
        search(q, k, mid + 1, hi, depth + 1, heap);
    };
    visit(left_first);
    // Revisit the far side unless the splitting plane is strictly beyond the
    // current worst candidate; <= keeps equal-distance ties reachable so the
    // (d2, row) order stays exact.
    if (static_cast<int>(heap.size()) < k || delta * delta <= heap.front().d2)
      visit(!left_first);
  }

  std::vector<Pt> pts_;
};

void brute_query(const std::vector<Pt>& pts, const double q[2], int k,
                 std::vector<Neighbor>& out) {
  out.clear();
  out.reserve(pts.size());
  for (const Pt& p : pts) out.push_back({dist2(q, p), p.row});
  std::partial_sort(out.begin(), out.begin() + k, out.end());
  out.resize(static_cast<std::size_t>(k));
}

}  // namespace

double score_distance(double e_i, double p_i, double e_j, double p_j) {
  const double de = e_i - e_j;
  const double dp = p_i - p_j;
  return std::sqrt(de * de + dp * dp);
}

int default_k(int n) {
  if (n < 2) throw ValidationError("need at least 2 units to match");
  return std::max(1, static_cast<int>(std::lround(std::log(n))));
}

MatchResult match_knn(const Dataset& ds, const ScoredSample& scores,
                      const MatchConfig& cfg) {
  require_valid(ds);
  const int n = ds.n();
  if (scores.e_hat.size() != n || scores.p_hat.size() != n)
    throw ValidationError("score vectors do not match the dataset size");
  if (cfg.k < 0) throw ValidationError("k must be non-negative");

  const int k_req = cfg.k == 0 ? default_k(n) : cfg.k;

  double p_scale = 1.0;
  if (cfg.standardize_p) {
    const double mean = scores.p_hat.mean();
    const double var =
        (scores.p_hat.array() - mean).square().sum() / n;  // population
    if (var > 0.0) p_scale = 1.0 / std::sqrt(var);
  }

  // Coordinates after axis selection; the unused axis collapses to 0 so one
  // distance does for every mode.
  auto coord = [&](int i, double out[2]) {
    out[0] = cfg.axes == AxisMode::prognostic_only ? 0.0 : scores.e_hat[i];
    out[1] =
        cfg.axes == AxisMode::propensity_only ? 0.0 : scores.p_hat[i] * p_scale;
  };

  std::vector<Pt> arm_pts[2];  // index by z
  for (int i = 0; i < n; ++i) {
    Pt p;
    coord(i, p.c);
    p.row = i;
    arm_pts[ds.z[i]].push_back(p);
  }
  const int n_treated = static_cast<int>(arm_pts[1].size());
  const int n_control = static_cast<int>(arm_pts[0].size());

  MatchResult res;
  res.k_requested = k_req;
  res.k_treated = std::min(k_req, n_control);
  res.k_control = std::min(k_req, n_treated);
  res.clamped = res.k_treated < k_req || res.k_control < k_req;
  res.neighbor_sets.resize(static_cast<std::size_t>(n));
  res.distances.resize(static_cast<std::size_t>(n));

  for (const int arm : {0, 1}) {
    const std::vector<Pt>& opposite = arm_pts[1 - arm];
    const int k_arm = arm == 1 ? res.k_treated : res.k_control;
    bool brute = cfg.algo == MatchAlgo::brute;
    if (cfg.algo == MatchAlgo::automatic)
      brute = static_cast<int>(opposite.size()) < kBruteForceBelow;

    KdTree tree(brute ? std::vector<Pt>{} : opposite);
    std::vector<Neighbor> found;
    for (const Pt& unit : arm_pts[arm]) {
      if (brute)
        brute_query(opposite, unit.c, k_arm, found);
      else
        tree.query(unit.c, k_arm, found);
      auto& ids = res.neighbor_sets[static_cast<std::size_t>(unit.row)];
      auto& dst = res.distances[static_cast<std::size_t>(unit.row)];
      ids.reserve(found.size());
      dst.reserve(found.size());
      for (const Neighbor& nb : found) {
        ids.push_back(nb.row);
        dst.push_back(std::sqrt(nb.d2));
      }
    }
  }
  return res;
}

ProxyEffects proxy_ite(const Dataset& ds, const MatchResult& match) {
  const int n = ds.n();
  if (static_cast<int>(match.neighbor_sets.size()) != n)
    throw ValidationError("match result does not cover the dataset");
  ProxyEffects out;
  out.y_tilde.resize(n);
  out.neighbor_mean.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto& nb = match.neighbor_sets[static_cast<std::size_t>(i)];
    if (nb.empty()) throw ValidationError("unit with no matches");
    double sum = 0.0;
    for (const int j : nb) sum += ds.y[j];
    const double cf = sum / static_cast<double>(nb.size());
    out.neighbor_mean[i] = cf;
    const double sign = ds.z[i] == 1 ? 1.0 : -1.0;
    out.y_tilde[i] = sign * (ds.y[i] - cf);
  }
  return out;
}

}  // namespace ppcate
