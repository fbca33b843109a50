#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tcdpp/core/errors.hpp"
#include "tcdpp/diffusion/sde.hpp"
#include "tcdpp/diffusion/simulate.hpp"

namespace tcdpp::diffusion {

// v(t, x) on layers t_j = j * dt and nodes x_i = lo + i * h.
struct ValueGrid {
  double lo = 0, h = 1, dt = 1;
  std::size_t nx = 0, nt = 0;
  std::vector<double> v;  // nt x nx, layer-major

  double x(std::size_t i) const { return lo + h * static_cast<double>(i); }
  double t(std::size_t j) const { return dt * static_cast<double>(j); }
  double at(std::size_t j, std::size_t i) const { return v[j * nx + i]; }
  double& at(std::size_t j, std::size_t i) { return v[j * nx + i]; }

  // Bilinear interpolation, clamped to the grid.
  double operator()(double xx, double tt) const {
    auto locate = [](double u, double step, std::size_t n, std::size_t& i0, double& w) {
      double q = std::clamp(u / step, 0.0, static_cast<double>(n - 1));
      i0 = std::min(static_cast<std::size_t>(q), n - 2);
      w = q - static_cast<double>(i0);
    };
    std::size_t i, j;
    double wx, wt;
    locate(xx - lo, h, nx, i, wx);
    locate(tt, dt, nt, j, wt);
    double a = (1 - wx) * at(j, i) + wx * at(j, i + 1);
    double b = (1 - wx) * at(j + 1, i) + wx * at(j + 1, i + 1);
    return (1 - wt) * a + wt * b;
  }
  // State (x, t).
  double operator()(const double* s) const { return (*this)(s[0], s[1]); }
};

enum class Differencing { Upwind, Central };

struct HjbSpec {
  double h = 0.01;
  double dt = 1e-4;          // time step of the scheme
  double store_dt = 1.0 / 256;  // spacing of the stored layers
  Differencing drift = Differencing::Upwind;
};

namespace detail {

struct Grid1D {
  double lo, hi, T;
  std::size_t nx, layers, sub;
  double dt;
};

inline Grid1D layout(const ControlledSDE& sde, const HjbSpec& spec, double dt) {
  if (sde.dim != 2 || sde.time_coord != 1) throw UnsupportedKind("hjb_solve handles one space coordinate plus time");
  Grid1D g{sde.lo[0], sde.hi[0], sde.hi[1], 0, 0, 0, 0};
  if (!std::isfinite(g.lo) || !std::isfinite(g.hi) || !std::isfinite(g.T) || !(g.T > 0))
    throw PreconditionError("hjb_solve needs a bounded box and a finite horizon");
  double q = (g.hi - g.lo) / spec.h;
  g.nx = static_cast<std::size_t>(std::llround(q)) + 1;
  if (std::abs(q - static_cast<double>(g.nx - 1)) > 1e-9 * q) throw PreconditionError("h does not divide the interval");
  double L = g.T / spec.store_dt;
  g.layers = static_cast<std::size_t>(std::llround(L)) + 1;
  if (std::abs(L - static_cast<double>(g.layers - 1)) > 1e-9 * L) throw PreconditionError("store_dt does not divide the horizon");
  g.sub = static_cast<std::size_t>(std::ceil(spec.store_dt / dt - 1e-9));
  g.dt = spec.store_dt / static_cast<double>(g.sub);
  return g;
}

inline ValueGrid blank(const Grid1D& g, const HjbSpec& spec) {
  ValueGrid out;
  out.lo = g.lo;
  out.h = spec.h;
  out.dt = spec.store_dt;
  out.nx = g.nx;
  out.nt = g.layers;
  out.v.assign(g.nx * g.layers, 0);
  return out;
}

struct Coeff {
  double b, s2, bt;  // space drift, space variance, time drift
};

inline Coeff coeff(const ControlledSDE& sde, double x, double t, std::size_t a) {
  double st[2] = {x, t}, b[2], s[4];
  sde.beta(st, a, b);
  sde.sigma(st, a, s);
  return {b[0], s[0] * s[0] + s[1] * s[1], b[1]};
}

// Off-diagonal weights of L_a at node i: L_a v = wm (v_{i-1} - v_i) + wp (v_{i+1} - v_i).
inline std::pair<double, double> weights(Coeff c, double h, Differencing d) {
  double diff = 0.5 * c.s2 / (h * h);
  if (d == Differencing::Central) return {diff - c.b / (2 * h), diff + c.b / (2 * h)};
  return {diff + std::max(-c.b, 0.0) / h, diff + std::max(c.b, 0.0) / h};
}

}  // namespace detail

// Explicit backward sweep v^n = v^{n+1} + dt max_a L_a v^{n+1} with Dirichlet
// data g on the spatial boundary and terminal data g. Throws CflViolation
// when the scheme would lose monotonicity.
inline ValueGrid hjb_solve(const ControlledSDE& sde, const Payoff& g, const HjbSpec& spec) {
  auto G = detail::layout(sde, spec, spec.dt);
  ValueGrid out = detail::blank(G, spec);
  const std::size_t nx = G.nx, A = sde.n_labels();
  std::vector<double> cur(nx), nxt(nx);
  auto payoff = [&](double x, double t) {
    double st[2] = {x, t};
    return g(st);
  };
  for (std::size_t i = 0; i < nx; ++i) cur[i] = payoff(out.x(i), G.T);
  std::copy(cur.begin(), cur.end(), out.v.begin() + static_cast<std::ptrdiff_t>((G.layers - 1) * nx));
  const std::size_t total = (G.layers - 1) * G.sub;
  for (std::size_t n = total; n-- > 0;) {
    double t_next = G.dt * static_cast<double>(n + 1), t = G.dt * static_cast<double>(n);
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < A; ++a) {
        auto [wm, wp] = detail::weights(detail::coeff(sde, out.x(i), t_next, a), spec.h, spec.drift);
        if (wm < 0 || wp < 0)
          throw PreconditionError("central differencing is not monotone here; refine h or use upwind");
        if (spec.dt * (wm + wp) > 1 + 1e-12) throw CflViolation("explicit HJB step violates the CFL bound", 1 / (wm + wp));
        best = std::max(best, wm * (cur[i - 1] - cur[i]) + wp * (cur[i + 1] - cur[i]));
      }
      nxt[i] = cur[i] + G.dt * best;
    }
    nxt[0] = payoff(G.lo, t);
    nxt[nx - 1] = payoff(G.hi, t);
    std::swap(cur, nxt);
    if (n % G.sub == 0)
      std::copy(cur.begin(), cur.end(), out.v.begin() + static_cast<std::ptrdiff_t>((n / G.sub) * nx));
  }
  return out;
}

// Largest explicit step the scheme accepts at resolution h.
inline double hjb_max_dt(const ControlledSDE& sde, double h, Differencing d = Differencing::Upwind,
                         std::size_t probes = 64) {
  double worst = 0;
  for (std::size_t j = 0; j <= probes; ++j)
    for (std::size_t i = 0; i <= probes; ++i) {
      double x = sde.lo[0] + (sde.hi[0] - sde.lo[0]) * static_cast<double>(i) / static_cast<double>(probes);
      double t = sde.hi[1] * static_cast<double>(j) / static_cast<double>(probes);
      for (std::size_t a = 0; a < sde.n_labels(); ++a) {
        auto [wm, wp] = detail::weights(detail::coeff(sde, x, t, a), h, d);
        worst = std::max(worst, wm + wp);
      }
    }
  return worst > 0 ? 1 / worst : std::numeric_limits<double>::infinity();
}

// Fully implicit upwind scheme, each step solved by policy iteration with a
// tridiagonal solve per policy.
inline ValueGrid hjb_solve_implicit(const ControlledSDE& sde, const Payoff& g, const HjbSpec& spec,
                                    std::size_t max_iter = 100) {
  auto G = detail::layout(sde, spec, spec.dt);
  ValueGrid out = detail::blank(G, spec);
  const std::size_t nx = G.nx, A = sde.n_labels();
  auto payoff = [&](double x, double t) {
    double st[2] = {x, t};
    return g(st);
  };
  std::vector<double> cur(nx), nxt(nx), lo(nx), di(nx), up(nx), rhs(nx), cp(nx), dp(nx);
  std::vector<std::size_t> pol(nx, 0);
  for (std::size_t i = 0; i < nx; ++i) cur[i] = payoff(out.x(i), G.T);
  std::copy(cur.begin(), cur.end(), out.v.begin() + static_cast<std::ptrdiff_t>((G.layers - 1) * nx));
  const std::size_t total = (G.layers - 1) * G.sub;
  for (std::size_t n = total; n-- > 0;) {
    double t = G.dt * static_cast<double>(n);
    nxt = cur;
    nxt[0] = payoff(G.lo, t);
    nxt[nx - 1] = payoff(G.hi, t);
    for (std::size_t it = 0;; ++it) {
      // (1 + dt (wm + wp)) v_i - dt wm v_{i-1} - dt wp v_{i+1} = cur_i
      for (std::size_t i = 0; i < nx; ++i) {
        if (i == 0 || i + 1 == nx) {
          lo[i] = up[i] = 0;
          di[i] = 1;
          rhs[i] = nxt[i];
          continue;
        }
        auto [wm, wp] = detail::weights(detail::coeff(sde, out.x(i), t, pol[i]), spec.h, Differencing::Upwind);
        lo[i] = -G.dt * wm;
        up[i] = -G.dt * wp;
        di[i] = 1 + G.dt * (wm + wp);
        rhs[i] = cur[i];
      }
      cp[0] = up[0] / di[0];
      dp[0] = rhs[0] / di[0];
      for (std::size_t i = 1; i < nx; ++i) {
        double m = di[i] - lo[i] * cp[i - 1];
        cp[i] = up[i] / m;
        dp[i] = (rhs[i] - lo[i] * dp[i - 1]) / m;
      }
      nxt[nx - 1] = dp[nx - 1];
      for (std::size_t i = nx - 1; i-- > 0;) nxt[i] = dp[i] - cp[i] * nxt[i + 1];
      bool changed = false;
      for (std::size_t i = 1; i + 1 < nx; ++i) {
        std::size_t best = pol[i];
        double bv = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < A; ++a) {
          auto [wm, wp] = detail::weights(detail::coeff(sde, out.x(i), t, a), spec.h, Differencing::Upwind);
          double val = wm * (nxt[i - 1] - nxt[i]) + wp * (nxt[i + 1] - nxt[i]);
          if (val > bv + 1e-14) {
            bv = val;
            best = a;
          }
        }
        if (best != pol[i]) {
          pol[i] = best;
          changed = true;
        }
      }
      if (!changed) break;
      if (it + 1 == max_iter) throw InvariantError("policy iteration did not settle");
    }
    std::swap(cur, nxt);
    if (n % G.sub == 0)
      std::copy(cur.begin(), cur.end(), out.v.begin() + static_cast<std::ptrdiff_t>((n / G.sub) * nx));
  }
  return out;
}

// Feedback label maximizing the discrete generator of v at the nearest node.
inline Policy greedy_policy(const ControlledSDE& sde, const ValueGrid& v) {
  auto table = std::make_shared<std::vector<std::size_t>>(v.nx * v.nt, 0);
  for (std::size_t j = 0; j < v.nt; ++j)
    for (std::size_t i = 1; i + 1 < v.nx; ++i) {
      double vx = (v.at(j, i + 1) - v.at(j, i - 1)) / (2 * v.h);
      double vxx = (v.at(j, i + 1) - 2 * v.at(j, i) + v.at(j, i - 1)) / (v.h * v.h);
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < sde.n_labels(); ++a) {
        auto c = detail::coeff(sde, v.x(i), v.t(j), a);
        double val = c.b * vx + 0.5 * c.s2 * vxx;
        if (val > best + 1e-14) {
          best = val;
          (*table)[j * v.nx + i] = a;
        }
      }
    }
  double lo = v.lo, h = v.h, dt = v.dt;
  std::size_t nx = v.nx, nt = v.nt;
  return {"greedy", [table, lo, h, dt, nx, nt](std::size_t, const double* x, const double*) {
            auto i = static_cast<std::size_t>(std::clamp(std::lround((x[0] - lo) / h), 1L, static_cast<long>(nx) - 2));
            auto j = static_cast<std::size_t>(std::clamp(std::lround(x[1] / dt), 0L, static_cast<long>(nt) - 1));
            return (*table)[j * nx + i];
          }};
}

struct ViscosityReport {
  bool supersolution = true, subsolution = true;
  double h_lower = 0, h_upper = 0;  // H of the touching paraboloids
  double tolerance = 0;
};

struct ViscositySpec {
  std::size_t r = 3;  // ball radius in grid cells
  double C = 5;
  std::optional<double> tolerance;  // overrides C (h + dt)
};

namespace detail {

// Solves the m x m system in place (Gaussian elimination, partial pivoting).
inline std::vector<double> solve_dense(std::vector<double> M, std::vector<double> b, std::size_t m) {
  for (std::size_t c = 0; c < m; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < m; ++r)
      if (std::abs(M[r * m + c]) > std::abs(M[p * m + c])) p = r;
    if (std::abs(M[p * m + c]) < 1e-300) throw InvariantError("singular least-squares system");
    for (std::size_t k = 0; k < m; ++k) std::swap(M[c * m + k], M[p * m + k]);
    std::swap(b[c], b[p]);
    for (std::size_t r = c + 1; r < m; ++r) {
      double f = M[r * m + c] / M[c * m + c];
      for (std::size_t k = c; k < m; ++k) M[r * m + k] -= f * M[c * m + k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(m);
  for (std::size_t c = m; c-- > 0;) {
    double s = b[c];
    for (std::size_t k = c + 1; k < m; ++k) s -= M[c * m + k] * x[k];
    x[c] = s / M[c * m + c];
  }
  return x;
}

}  // namespace detail

// At node (j, i): least-squares quadratic q over the r-ball, re-anchored so
// that it passes through v at the node, then bent down (up) by the smallest
// kappa |z|^2 that puts it below (above) v on the ball. The ball metric
// measures time in units of dt * h / dt so both axes count cells alike.
inline ViscosityReport viscosity_check(const ValueGrid& v, std::size_t j, std::size_t i, const ControlledSDE& sde,
                                       const ViscositySpec& spec = {}) {
  const auto r = static_cast<long>(spec.r);
  if (spec.r < 1) throw PreconditionError("viscosity_check needs r >= 1");
  if (i < spec.r || i + spec.r >= v.nx || j < spec.r || j + spec.r >= v.nt)
    throw PreconditionError("viscosity_check at a node whose ball leaves the grid");
  struct Pt {
    double dx, dt, val, n2;
  };
  std::vector<Pt> pts;
  for (long dj = -r; dj <= r; ++dj)
    for (long di = -r; di <= r; ++di) {
      if (di * di + dj * dj > r * r) continue;
      double dx = v.h * static_cast<double>(di), dt = v.dt * static_cast<double>(dj);
      double n2 = v.h * v.h * static_cast<double>(di * di + dj * dj);
      pts.push_back({dx, dt, v.at(j + static_cast<std::size_t>(dj), i + static_cast<std::size_t>(di)), n2});
    }
  // q = c + p_x dx + p_t dt + 1/2 A_xx dx^2 + A_xt dx dt + 1/2 A_tt dt^2
  constexpr std::size_t m = 6;
  std::vector<double> M(m * m, 0), b(m, 0);
  for (const auto& p : pts) {
    std::array<double, m> f{1, p.dx, p.dt, 0.5 * p.dx * p.dx, p.dx * p.dt, 0.5 * p.dt * p.dt};
    for (std::size_t a = 0; a < m; ++a) {
      b[a] += f[a] * p.val;
      for (std::size_t c = 0; c < m; ++c) M[a * m + c] += f[a] * f[c];
    }
  }
  auto q = detail::solve_dense(M, b, m);
  const double v0 = v.at(j, i);
  auto q0 = [&](const Pt& p) {
    return v0 + q[1] * p.dx + q[2] * p.dt + 0.5 * q[3] * p.dx * p.dx + q[4] * p.dx * p.dt + 0.5 * q[5] * p.dt * p.dt;
  };
  double k_lo = 0, k_up = 0;
  for (const auto& p : pts) {
    if (p.n2 == 0) continue;
    double d = q0(p) - p.val;
    k_lo = std::max(k_lo, d / p.n2);
    k_up = std::max(k_up, -d / p.n2);
  }
  // The metric is h^2 (di^2 + dj^2) = dx^2 + (h/dt)^2 dt^2, so the xx entry
  // of the paraboloid's Hessian is 2 kappa.
  auto H = [&](double axx) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < sde.n_labels(); ++a) {
      auto c = detail::coeff(sde, v.x(i), v.t(j), a);
      best = std::max(best, c.b * q[1] + c.bt * q[2] + 0.5 * c.s2 * axx);
    }
    return best;
  };
  ViscosityReport out;
  out.tolerance = spec.tolerance ? *spec.tolerance : spec.C * (v.h + v.dt);
  out.h_lower = H(q[3] - 2 * k_lo);
  out.h_upper = H(q[3] + 2 * k_up);
  out.supersolution = out.h_lower <= out.tolerance;
  out.subsolution = out.h_upper >= -out.tolerance;
  return out;
}

}  // namespace tcdpp::diffusion
