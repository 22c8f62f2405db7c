#pragma once

#include <vector>

#include "ppcate/rng.hpp"

namespace ppcate {

// Fold id per row: rows are shuffled once and dealt round-robin, so fold
// sizes differ by at most one. Shared by every cross-validation loop.
inline std::vector<int> assign_folds(int n, int folds, Rng& rng) {
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  rng.shuffle(order);
  std::vector<int> fold_of(static_cast<std::size_t>(n));
  for (int pos = 0; pos < n; ++pos) {
    const int row = order[static_cast<std::size_t>(pos)];
    fold_of[static_cast<std::size_t>(row)] = pos % folds;
  }
  return fold_of;
}

}  // namespace ppcate
