#include "ppcate/dataset.hpp"

#include <cmath>
#include <sstream>

#include "ppcate/errors.hpp"

namespace ppcate {

std::vector<int> Dataset::treated_indices() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(n_treated()));
  for (int i = 0; i < n(); ++i)
    if (z[i] == 1) out.push_back(i);
  return out;
}

std::vector<int> Dataset::control_indices() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(n_control()));
  for (int i = 0; i < n(); ++i)
    if (z[i] == 0) out.push_back(i);
  return out;
}

Dataset Dataset::subset(const std::vector<int>& rows) const {
  Dataset out;
  const int m = static_cast<int>(rows.size());
  out.X.resize(m, d());
  out.z.resize(m);
  out.y.resize(m);
  if (tau_true) out.tau_true = Eigen::VectorXd(m);
  for (int r = 0; r < m; ++r) {
    const int i = rows[static_cast<std::size_t>(r)];
    out.X.row(r) = X.row(i);
    out.z[r] = z[i];
    out.y[r] = y[i];
    if (tau_true) (*out.tau_true)[r] = (*tau_true)[i];
  }
  return out;
}

ValidationReport validate(const Dataset& ds) {
  ValidationReport rep;
  const int n = static_cast<int>(ds.X.rows());
  if (n < 2) rep.problems.push_back("fewer than 2 units");
  if (ds.X.cols() < 1) rep.problems.push_back("no covariate columns");
  if (ds.z.size() != n)
    rep.problems.push_back("treatment vector length does not match X");
  if (ds.y.size() != n)
    rep.problems.push_back("outcome vector length does not match X");
  if (ds.tau_true && ds.tau_true->size() != n)
    rep.problems.push_back("tau_true length does not match X");

  if (ds.z.size() == n && n > 0) {
    int treated = 0, control = 0;
    bool bad_label = false;
    for (int i = 0; i < n; ++i) {
      if (ds.z[i] == 1)
        ++treated;
      else if (ds.z[i] == 0)
        ++control;
      else
        bad_label = true;
    }
    if (bad_label) rep.problems.push_back("treatment indicator outside {0,1}");
    if (treated == 0) rep.problems.push_back("treated arm empty");
    if (control == 0) rep.problems.push_back("control arm empty");
  }

  if (!ds.X.allFinite()) rep.problems.push_back("non-finite covariate");
  if (ds.y.size() == n && !ds.y.allFinite())
    rep.problems.push_back("non-finite outcome");
  return rep;
}

void require_valid(const Dataset& ds) {
  const ValidationReport rep = validate(ds);
  if (rep.ok()) return;
  std::ostringstream msg;
  msg << "invalid dataset:";
  for (const auto& p : rep.problems) msg << " [" << p << "]";
  throw ValidationError(msg.str());
}

OverlapReport check_overlap(const ScoredSample& scores, double eps) {
  if (!(eps > 0.0 && eps < 0.5))
    throw ValidationError("overlap eps must lie in (0, 0.5)");
  OverlapReport rep;
  rep.eps = eps;
  for (int i = 0; i < scores.n(); ++i) {
    const double e = scores.e_hat[i];
    if (e < eps || e > 1.0 - eps) rep.violating.push_back(i);
  }
  return rep;
}

}  // namespace ppcate
