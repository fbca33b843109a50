#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "tcdpp/core/errors.hpp"
#include "tcdpp/pathspace/path.hpp"

namespace tcdpp::follower {

// On the grid a left-continuous step path alpha jumps right after t_k by
// alpha_{k+1} - alpha_k, so alpha+_k = alpha_{k+1} (and alpha+_K = alpha_K).
inline std::vector<double> plus_values(const Component& c, std::size_t i = 0) {
  const std::size_t n = c.values.size() / c.dim;
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = c.at(std::min(k + 1, n - 1), i);
  return out;
}

// Right-continuous paths are their own right limits.
inline Path plus_envelope(const Path& alpha) {
  const auto& c = alpha.component(0);
  if (c.dim != 1) throw UnsupportedKind("plus_envelope expects a scalar path");
  if (c.kind != PathKind::CaglladStep) return Path::cadlag(alpha.grid(), c.values);
  return Path::cadlag(alpha.grid(), plus_values(c));
}

namespace detail {

inline void require_scalar_pair(const Path& gamma, const Path& alpha) {
  require_same_grid(gamma.grid(), alpha.grid());
  if (gamma.component(0).dim != 1 || alpha.component(0).dim != 1)
    throw UnsupportedKind("left integral of scalar paths only");
}

}  // namespace detail

// zeta_j = gamma_0 (alpha+_0 - alpha_0) + sum over the jumps of alpha+ in
// (0, t_j), i.e. sum_{k < j} gamma_k (alpha_{k+1} - alpha_k); zeta_0 = 0.
inline std::vector<double> left_integral_values(const Path& gamma, const Path& alpha) {
  detail::require_scalar_pair(gamma, alpha);
  const auto& g = gamma.component(0);
  const auto& a = alpha.component(0);
  const std::size_t n = alpha.grid().size();
  std::vector<double> z(n, 0);
  for (std::size_t j = 1; j < n; ++j) z[j] = z[j - 1] + g.at(j - 1) * (a.at(j) - a.at(j - 1));
  return z;
}

inline double left_integral(const Path& gamma, const Path& alpha, GridTime t) {
  if (t.is_infinite()) throw GridMismatch("left integral at infinity");
  alpha.grid().check(t);
  return left_integral_values(gamma, alpha)[t.index()];
}

inline Path left_integral_path(const Path& gamma, const Path& alpha) {
  auto z = left_integral_values(gamma, alpha);
  bool up = true;
  for (std::size_t k = 1; k < z.size(); ++k) up = up && z[k] >= z[k - 1];
  return Path::caglad(alpha.grid(), std::move(z), up);
}

// The initial jump identity zeta+_0 - zeta_0 = gamma_0 (alpha+_0 - alpha_0)
// and, for every grid pair r < s, zeta+_s - zeta+_r between the min and max
// of gamma over (r, s] times alpha+_s - alpha+_r. (r, s] collects exactly the
// jumps of alpha+ in that window, so on the grid this pins zeta down to
// zeta_0 plus the left integral. Comparisons are exact unless tol > 0, which
// allows a relative slack for paths built in floating point.
inline bool left_integral_characterization(const std::vector<double>& zeta, const Path& gamma, const Path& alpha,
                                           double tol = 0) {
  detail::require_scalar_pair(gamma, alpha);
  const auto& g = gamma.component(0);
  const auto& a = alpha.component(0);
  const std::size_t n = alpha.grid().size();
  if (zeta.size() != n) throw GridMismatch("zeta has the wrong length");
  if (n == 1) return true;
  auto slack = [tol](double x, double y) { return tol * (1 + std::abs(x) + std::abs(y)); };
  {
    double l = zeta[1] - zeta[0], r = g.at(0) * (a.at(1) - a.at(0));
    if (std::abs(l - r) > slack(zeta[1], zeta[0])) return false;
  }
  auto ap = plus_values(a);
  std::vector<double> zp(n);
  for (std::size_t k = 0; k < n; ++k) zp[k] = zeta[std::min(k + 1, n - 1)];
  for (std::size_t r = 0; r < n; ++r) {
    double lo = 0, hi = 0;
    for (std::size_t s = r + 1; s < n; ++s) {
      double gs = g.at(s);
      lo = s == r + 1 ? gs : std::min(lo, gs);
      hi = s == r + 1 ? gs : std::max(hi, gs);
      double da = ap[s] - ap[r], dz = zp[s] - zp[r];
      if (da < -slack(ap[s], ap[r])) return false;
      double e = slack(zp[s], zp[r]) + slack(lo * ap[s], hi * ap[r]);
      if (dz < lo * da - e || dz > hi * da + e) return false;
    }
  }
  return true;
}

inline bool left_integral_characterization(const Path& zeta, const Path& gamma, const Path& alpha, double tol = 0) {
  require_same_grid(zeta.grid(), alpha.grid());
  const auto& c = zeta.component(0);
  std::vector<double> z(c.values.begin(), c.values.end());
  if (c.dim != 1) throw UnsupportedKind("zeta must be scalar");
  return left_integral_characterization(z, gamma, alpha, tol);
}

}  // namespace tcdpp::follower
