#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "tcdpp/core/errors.hpp"
#include "tcdpp/core/random.hpp"
#include "tcdpp/core/summation.hpp"
#include "tcdpp/measures/finite_measure.hpp"
#include "tcdpp/pathspace/path.hpp"

namespace tcdpp::follower {

using Vec = std::vector<double>;

struct StrategyError : Error {
  using Error::Error;
};

// State x = (y, z) with y in R^n driven by an SDE whose coefficients may
// depend on z, and z in R^m moved only by the control: dZ = c(Y) d alpha.
struct FollowerInstance {
  using Coef = std::function<void(const double* y, const double* z, double* out)>;
  using Coupling = std::function<void(const double* y, double* out)>;

  std::size_t n = 1, m = 1;
  std::size_t noise_dim = 0;  // driven Brownian columns of sigma; 0 means n
  Coef beta;                  // n
  Coef sigma;                 // n x n, row-major
  Coupling c;                 // m, nonnegative
  Vec lo, hi;                 // O = open box in R^{n+m}
  std::function<double(const double* x)> payoff;  // G on the absorbed state
  // Coordinate of y counting down the remaining time, if any.
  std::size_t time_coord = std::numeric_limits<std::size_t>::max();

  std::size_t dim() const { return n + m; }
  std::size_t noise() const { return noise_dim == 0 ? n : noise_dim; }
  bool inside(const double* x) const {
    for (std::size_t i = 0; i < dim(); ++i)
      if (!(x[i] > lo[i] && x[i] < hi[i])) return false;
    return true;
  }
  bool in_closure(const double* x) const {
    for (std::size_t i = 0; i < dim(); ++i)
      if (!(x[i] >= lo[i] && x[i] <= hi[i])) return false;
    return true;
  }
  void project(double* x) const {
    for (std::size_t i = 0; i < dim(); ++i) x[i] = std::min(hi[i], std::max(lo[i], x[i]));
  }
};

// Next control increment from the grid index, the current state, the
// accumulated control and the start point.
struct Strategy {
  std::string name;
  std::function<double(std::size_t k, const double* x, double alpha, const double* x0)> push;
};

struct FollowerSpec {
  double dt = 1.0 / 256;
  std::size_t paths = 1000;
  std::uint64_t seed = 0;
  double horizon = std::numeric_limits<double>::quiet_NaN();  // default: remaining time in x0
};

// Nonnegativity of c on random points of [-clip, clip]^n.
inline bool coupling_nonnegative(const FollowerInstance& inst, std::size_t samples, std::uint64_t seed,
                                 double clip = 10) {
  Stream rng(seed, 1);
  Vec y(inst.n), out(inst.m);
  for (std::size_t s = 0; s < samples; ++s) {
    for (auto& v : y) v = -clip + 2 * clip * rng.uniform();
    inst.c(y.data(), out.data());
    for (double v : out)
      if (!(v >= 0)) return false;
  }
  return true;
}

namespace detail {

inline std::size_t follower_steps(const FollowerInstance& inst, const Vec& x0, const FollowerSpec& spec) {
  double T = spec.horizon;
  if (std::isnan(T)) {
    if (inst.time_coord >= inst.n) throw PreconditionError("no time coordinate and no horizon given");
    T = x0[inst.time_coord];
  }
  if (!(spec.dt > 0) || !(T >= 0)) throw PreconditionError("need dt > 0 and a nonnegative horizon");
  double q = T / spec.dt;
  auto k = static_cast<std::size_t>(std::llround(q));
  if (std::abs(q - static_cast<double>(k)) > 1e-9 * std::max(1.0, q)) throw PreconditionError("dt does not divide horizon");
  return k;
}

inline void check_start(const FollowerInstance& inst, const Vec& x0) {
  if (x0.size() != inst.dim() || !inst.in_closure(x0.data())) throw PreconditionError("x0 outside the closure of O");
}

}  // namespace detail

// Euler-Maruyama for Y, Z_{k+1} = Z_k + c(Y_k) (alpha_{k+1} - alpha_k).
// visit(k, x, alpha, absorbed) sees the state before the push at k;
// returning false ends the path. Absorbed paths receive no more pushes.
template <class Visit>
void simulate_follower_path(const FollowerInstance& inst, const Strategy& st, const Vec& x0, double dt,
                            std::size_t steps, std::uint64_t seed, std::uint64_t path, Visit&& visit) {
  const std::size_t n = inst.n, m = inst.m, d = inst.noise();
  thread_local Vec x, b, s, z, cy;
  x.assign(x0.begin(), x0.end());
  b.resize(n);
  s.resize(n * n);
  z.resize(n);
  cy.resize(m);
  Stream rng(seed, path);
  bool absorbed = !inst.inside(x.data());
  double alpha = 0;
  const double sq = std::sqrt(dt);
  auto where = [&](std::size_t k) {
    return "(seed " + std::to_string(seed) + ", path " + std::to_string(path) + ", step " + std::to_string(k) + ")";
  };
  for (std::size_t k = 0;; ++k) {
    if (!visit(k, static_cast<const double*>(x.data()), alpha, absorbed) || k == steps) return;
    if (absorbed) continue;
    double da = st.push(k, x.data(), alpha, x0.data());
    if (!(da >= 0) || !std::isfinite(da))
      throw StrategyError("strategy " + st.name + " proposed increment " + std::to_string(da) + " " + where(k));
    const double a1 = alpha + da;
    const double inc = a1 - alpha;
    inst.beta(x.data(), x.data() + n, b.data());
    inst.sigma(x.data(), x.data() + n, s.data());
    inst.c(x.data(), cy.data());
    for (std::size_t j = 0; j < d; ++j) z[j] = rng.normal();
    for (std::size_t i = 0; i < n; ++i) {
      double dx = b[i] * dt;
      for (std::size_t j = 0; j < d; ++j) dx += s[i * n + j] * sq * z[j];
      x[i] += dx;
    }
    for (std::size_t i = 0; i < m; ++i) x[n + i] += cy[i] * inc;
    alpha = a1;
    for (std::size_t i = 0; i < n + m; ++i)
      if (!std::isfinite(x[i])) throw SimulationError("non-finite state " + where(k + 1));
    if (!inst.inside(x.data())) {
      inst.project(x.data());
      absorbed = true;
    }
  }
}

// Paths of (Y, Z, alpha): ContinuousPL, CaglladStep, nondecreasing CaglladStep.
inline EmpiricalMeasure<Path> simulate_follower(const FollowerInstance& inst, const Strategy& st, const Vec& x0,
                                                const FollowerSpec& spec) {
  detail::check_start(inst, x0);
  const std::size_t steps = detail::follower_steps(inst, x0, spec);
  TimeGrid grid(spec.dt, steps);
  std::vector<Path> out;
  out.reserve(spec.paths);
  for (std::size_t p = 0; p < spec.paths; ++p) {
    Component y{PathKind::ContinuousPL, inst.n, {}};
    Component z{PathKind::CaglladStep, inst.m, {}};
    Component a{PathKind::CaglladStep, 1, {}};
    a.nondecreasing = true;
    simulate_follower_path(inst, st, x0, spec.dt, steps, spec.seed, p,
                           [&](std::size_t, const double* x, double alpha, bool) {
                             y.values.insert(y.values.end(), x, x + inst.n);
                             z.values.insert(z.values.end(), x + inst.n, x + inst.n + inst.m);
                             a.values.push_back(alpha);
                             return true;
                           });
    out.emplace_back(grid, std::vector<Component>{std::move(y), std::move(z), std::move(a)});
  }
  return EmpiricalMeasure<Path>(std::move(out), spec.seed);
}

// c(Y_k) along a simulated path, coordinate i, as a CadlagStep integrand.
inline Path coupling_path(const FollowerInstance& inst, const Path& w, std::size_t i) {
  const auto& y = w.component(0);
  std::vector<double> v;
  Vec out(inst.m);
  for (std::size_t k = 0; k < w.grid().size(); ++k) {
    inst.c(y.values.data() + k * inst.n, out.data());
    v.push_back(out.at(i));
  }
  return Path::cadlag(w.grid(), std::move(v));
}

namespace strategies {

inline Strategy none() {
  return {"none", [](std::size_t, const double*, double, const double*) { return 0.0; }};
}

inline Strategy impulse(double size) {
  return {"impulse:" + std::to_string(size),
          [size](std::size_t k, const double*, double, const double*) { return k == 0 ? size : 0.0; }};
}

}  // namespace strategies

// ---- classical follower -------------------------------------------------
// y = (T, W, H) with T the remaining time, W a Brownian motion and H the
// running cost; z = (L, C) with L the follower position and C the fuel spent.
// G = H + C + g(W - L) is minimized.

struct ClassicalParams {
  std::string name = "quadratic";
  std::function<double(double T)> fuel = [](double) { return 0.5; };
  std::function<double(double T, double d)> running = [](double, double d) { return d * d; };
  std::function<double(double d)> terminal = [](double d) { return d * d; };
};

inline ClassicalParams quadratic_follower(double fuel_price, double running_weight = 1, double terminal_weight = 1) {
  if (!(fuel_price >= 0) || !(running_weight >= 0) || !(terminal_weight >= 0))
    throw PreconditionError("follower costs must be nonnegative");
  ClassicalParams p;
  p.name = "quadratic";
  p.fuel = [fuel_price](double) { return fuel_price; };
  p.running = [running_weight](double, double d) { return running_weight * d * d; };
  p.terminal = [terminal_weight](double d) { return terminal_weight * d * d; };
  return p;
}

// Coordinates of the classical state.
enum : std::size_t { kT = 0, kW = 1, kH = 2, kL = 3, kC = 4 };

inline FollowerInstance classical_instance(const ClassicalParams& p) {
  FollowerInstance inst;
  inst.n = 3;
  inst.m = 2;
  inst.noise_dim = 1;
  inst.time_coord = kT;
  inst.beta = [p](const double* y, const double* z, double* out) {
    out[0] = -1;
    out[1] = 0;
    out[2] = p.running(y[0], y[1] - z[0]);
  };
  inst.sigma = [](const double*, const double*, double* out) {
    std::fill(out, out + 9, 0.0);
    out[3] = 1;
  };
  inst.c = [p](const double* y, double* out) {
    out[0] = 1;
    out[1] = p.fuel(y[0]);
  };
  const double inf = std::numeric_limits<double>::infinity();
  inst.lo = {0, -inf, -inf, -inf, -inf};
  inst.hi = {inf, inf, inf, inf, inf};
  inst.payoff = [p](const double* x) { return x[kH] + x[kC] + p.terminal(x[kW] - x[kL]); };
  return inst;
}

inline Vec classical_start(double horizon, double w0, double l0 = 0) { return {horizon, w0, 0, l0, 0}; }

// Discrete-time dynamic programming on the gap d = W - L: binomial steps of
// size sqrt(dt), pushes on the lattice delta N, lattice spacing eta dividing
// both. V_K = g, V_k(d) = h d dt + min_j [f j delta + E V_{k+1}(d - j delta +- sqrt(dt))].
class DpOracle {
 public:
  double dt = 0, eta = 0, dmin = 0, horizon = 0, delta = 0;
  std::size_t nd = 0, K = 0;
  std::vector<double> v;        // (K + 1) x nd
  std::vector<double> barrier;  // K: largest gap left alone before the first push

  double d(std::size_t i) const { return dmin + eta * static_cast<double>(i); }
  double at(std::size_t k, std::size_t i) const { return v[k * nd + i]; }

  // Linear in d and in the remaining time, clamped to the lattice.
  double cost_to_go(double T, double gap) const {
    double r = std::clamp((horizon - T) / dt, 0.0, static_cast<double>(K));
    auto k = static_cast<std::size_t>(std::floor(r));
    if (k == K) k = K - 1;
    double wt = r - static_cast<double>(k);
    return (1 - wt) * in_gap(k, gap) + wt * in_gap(k + 1, gap);
  }

  // Value of a classical state x = (T, W, H, L, C).
  double operator()(const double* x) const { return x[kH] + x[kC] + cost_to_go(x[kT], x[kW] - x[kL]); }

  double barrier_at(double T) const {
    double r = std::clamp((horizon - T) / dt, 0.0, static_cast<double>(K) - 1);
    return barrier[static_cast<std::size_t>(std::llround(r))];
  }

 private:
  double in_gap(std::size_t k, double gap) const {
    double r = std::clamp((gap - dmin) / eta, 0.0, static_cast<double>(nd - 1));
    auto i = static_cast<std::size_t>(std::floor(r));
    if (i == nd - 1) return at(k, i);
    double w = r - static_cast<double>(i);
    return (1 - w) * at(k, i) + w * at(k, i + 1);
  }
};

inline DpOracle solve_follower_dp(const ClassicalParams& p, double horizon, double dt, double delta,
                                  double dmax = 4) {
  if (!(dt > 0) || !(delta > 0) || !(horizon > 0) || !(dmax > 0)) throw PreconditionError("bad DP parameters");
  DpOracle o;
  o.dt = dt;
  o.horizon = horizon;
  o.delta = delta;
  double q = horizon / dt;
  o.K = static_cast<std::size_t>(std::llround(q));
  if (o.K == 0 || std::abs(q - static_cast<double>(o.K)) > 1e-9 * q) throw PreconditionError("dt does not divide horizon");
  const double s = std::sqrt(dt);
  std::size_t ms = 0, mq = 0;
  for (std::size_t m = 1; m <= 256 && !ms; ++m) {
    double r = delta * static_cast<double>(m) / s;
    if (std::abs(r - std::round(r)) < 1e-9 * std::max(1.0, r) && std::round(r) >= 1) {
      ms = m;
      mq = static_cast<std::size_t>(std::llround(r));
    }
  }
  if (!ms) throw PreconditionError("no common lattice for the push size and sqrt(dt)");
  o.eta = s / static_cast<double>(ms);
  const auto half = static_cast<std::size_t>(std::ceil(dmax / o.eta));
  o.nd = 2 * half + 1;
  o.dmin = -o.eta * static_cast<double>(half);
  o.v.assign((o.K + 1) * o.nd, 0);
  o.barrier.assign(o.K, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < o.nd; ++i) o.v[o.K * o.nd + i] = p.terminal(o.d(i));
  std::vector<double> cont(o.nd);
  const auto last = static_cast<std::ptrdiff_t>(o.nd - 1);
  for (std::size_t k = o.K; k-- > 0;) {
    const double T = horizon - dt * static_cast<double>(k);
    const double f = p.fuel(T);
    const double* next = &o.v[(k + 1) * o.nd];
    for (std::size_t i = 0; i < o.nd; ++i) {
      auto up = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(i + ms), last);
      auto dn = std::max<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(ms), 0);
      cont[i] = 0.5 * (next[up] + next[dn]);
    }
    bool pushed = false;
    for (std::size_t i = 0; i < o.nd; ++i) {
      double best = cont[i];
      std::size_t jbest = 0;
      for (std::size_t j = 1; j * mq <= i; ++j) {
        double c = f * delta * static_cast<double>(j) + cont[i - j * mq];
        if (c < best) {
          best = c;
          jbest = j;
        }
      }
      o.v[k * o.nd + i] = p.running(T, o.d(i)) * dt + best;
      if (jbest > 0 && !pushed) {
        pushed = true;
        o.barrier[k] = i > 0 ? o.d(i - 1) : o.d(0);
      }
    }
  }
  return o;
}

namespace strategies {

// Reflect W - L at b: push whatever lies above the barrier.
inline Strategy barrier(double b) {
  return {"barrier:" + std::to_string(b), [b](std::size_t, const double* x, double, const double*) {
            return std::max(0.0, x[kW] - x[kL] - b);
          }};
}

// Time-dependent barrier read off a DP oracle.
inline Strategy dp_barrier(const DpOracle& o) {
  return {"dp-barrier", [o](std::size_t, const double* x, double, const double*) {
            return std::max(0.0, x[kW] - x[kL] - o.barrier_at(x[kT]));
          }};
}

inline std::vector<Strategy> classical_class(const DpOracle& o) {
  return {none(), barrier(0.25), barrier(0.5), barrier(0.75), barrier(1.0), dp_barrier(o)};
}

}  // namespace strategies

struct FollowerValue {
  double v_mc = 0, stderr_ = 0;
  std::size_t argmin = 0;
  std::vector<MeanEstimate> per_strategy;
  double v_dp = 0;        // DP oracle at push lattice delta
  double v_dp_half = 0;   // and at delta / 2
  double delta_bias = 0;  // |v_dp - v_dp_half|
};

// min over the class of MC means of G; all strategies share per-path streams.
inline FollowerValue estimate_follower_value(const FollowerInstance& inst, const std::vector<Strategy>& cls,
                                             const Vec& x0, const FollowerSpec& spec) {
  if (cls.empty()) throw PreconditionError("empty strategy class");
  detail::check_start(inst, x0);
  const std::size_t steps = detail::follower_steps(inst, x0, spec);
  FollowerValue out;
  std::vector<double> vals(spec.paths);
  for (const auto& st : cls) {
    for (std::size_t p = 0; p < spec.paths; ++p)
      simulate_follower_path(inst, st, x0, spec.dt, steps, spec.seed, p,
                             [&](std::size_t k, const double* x, double, bool absorbed) {
                               if (k < steps && !absorbed) return true;
                               vals[p] = inst.payoff(x);
                               return false;
                             });
    out.per_strategy.push_back(mean_estimate(vals));
  }
  for (std::size_t i = 1; i < cls.size(); ++i)
    if (out.per_strategy[i].mean < out.per_strategy[out.argmin].mean) out.argmin = i;
  out.v_mc = out.per_strategy[out.argmin].mean;
  out.stderr_ = out.per_strategy[out.argmin].stderr_;
  return out;
}

struct ClassicalSpec {
  FollowerSpec sim;
  double delta = 0.1;  // push lattice of the DP oracle
  double dmax = 4;
};

inline FollowerValue classical_follower_value(const ClassicalParams& p, const Vec& x0, const ClassicalSpec& spec) {
  const double T = x0.at(kT);
  auto o = solve_follower_dp(p, T, spec.sim.dt, spec.delta, spec.dmax);
  auto oh = solve_follower_dp(p, T, spec.sim.dt, spec.delta / 2, spec.dmax);
  auto inst = classical_instance(p);
  auto out = estimate_follower_value(inst, strategies::classical_class(oh), x0, spec.sim);
  out.v_dp = o(x0.data());
  out.v_dp_half = oh(x0.data());
  out.delta_bias = std::abs(out.v_dp - out.v_dp_half);
  return out;
}

struct FollowerStop {
  std::string name;
  std::function<bool(std::size_t k, const double* x, const double* x0)> stop;
};

namespace stops {

inline FollowerStop never() {
  return {"never", [](std::size_t, const double*, const double*) { return false; }};
}
inline FollowerStop at_step(std::size_t j) {
  return {"step:" + std::to_string(j), [j](std::size_t k, const double*, const double*) { return k >= j; }};
}
// First grid time with |W - L| >= r.
inline FollowerStop gap_exit(double r) {
  return {"gap-exit:" + std::to_string(r),
          [r](std::size_t, const double* x, const double*) { return std::abs(x[kW] - x[kL]) >= r; }};
}

}  // namespace stops

struct FollowerDppReport {
  double lhs = 0, rhs = 0, stderr_ = 0, z = 0;
  std::size_t argmin = 0;
  std::vector<MeanEstimate> per_strategy;
};

// lhs = vhat(x0), rhs = min over the class of E[vhat(X_tau) 1{tau fires} + G
// 1{tau never fires}], tau capped at the absorption time.
inline FollowerDppReport check_dpp_follower(const FollowerInstance& inst, const std::vector<Strategy>& cls,
                                            const Vec& x0, const FollowerStop& tau,
                                            const std::function<double(const double*)>& vhat,
                                            const FollowerSpec& spec) {
  if (cls.empty()) throw PreconditionError("empty strategy class");
  detail::check_start(inst, x0);
  const std::size_t steps = detail::follower_steps(inst, x0, spec);
  FollowerDppReport out;
  out.lhs = vhat(x0.data());
  std::vector<double> vals(spec.paths);
  for (const auto& st : cls) {
    for (std::size_t p = 0; p < spec.paths; ++p)
      simulate_follower_path(inst, st, x0, spec.dt, steps, spec.seed, p,
                             [&](std::size_t k, const double* x, double, bool absorbed) {
                               if (tau.stop(k, x, x0.data())) {
                                 vals[p] = vhat(x);
                                 return false;
                               }
                               if (k < steps && !absorbed) return true;
                               vals[p] = inst.payoff(x);
                               return false;
                             });
    out.per_strategy.push_back(mean_estimate(vals));
  }
  for (std::size_t i = 1; i < cls.size(); ++i)
    if (out.per_strategy[i].mean < out.per_strategy[out.argmin].mean) out.argmin = i;
  out.rhs = out.per_strategy[out.argmin].mean;
  out.stderr_ = out.per_strategy[out.argmin].stderr_;
  double d = out.lhs - out.rhs;
  out.z = out.stderr_ > 0 ? d / out.stderr_ : d == 0 ? 0 : std::copysign(std::numeric_limits<double>::infinity(), d);
  return out;
}

}  // namespace tcdpp::follower
