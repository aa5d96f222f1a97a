#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace ioeq {

// Nearest-rank percentile on an already sorted vector: the value at rank
// ceil(p/100 * N), 1-based. p in [0, 100]; p = 0 returns the minimum.
inline double nearest_rank(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) {
    throw std::invalid_argument("nearest_rank: empty input");
  }
  if (p <= 0.0) return sorted.front();
  const auto n = sorted.size();
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(n)));
  if (rank < 1) rank = 1;
  if (rank > n) rank = n;
  return sorted[rank - 1];
}

inline double mean_of(const std::vector<double>& v) {
  if (v.empty()) {
    throw std::invalid_argument("mean_of: empty input");
  }
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace ioeq
