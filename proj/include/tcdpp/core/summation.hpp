#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace tcdpp {

// Pairwise summation in a fixed tree order; the result depends only on the
// input order, not on how the caller partitioned the work.
inline double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 8) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  std::size_t h = n / 2;
  return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

inline double pairwise_sum(const std::vector<double>& x) { return pairwise_sum(x.data(), x.size()); }

struct MeanEstimate {
  double mean = 0;
  double stderr_ = 0;
  std::size_t n = 0;
};

inline MeanEstimate mean_estimate(const std::vector<double>& x) {
  MeanEstimate e;
  e.n = x.size();
  if (x.empty()) return e;
  if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); })) {
    e.mean = x.front();  // exact for degenerate samples
    return e;
  }
  e.mean = pairwise_sum(x) / static_cast<double>(x.size());
  if (x.size() < 2) return e;
  std::vector<double> sq(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) sq[i] = (x[i] - e.mean) * (x[i] - e.mean);
  double var = pairwise_sum(sq) / static_cast<double>(x.size() - 1);
  e.stderr_ = std::sqrt(var / static_cast<double>(x.size()));
  return e;
}

}  // namespace tcdpp
