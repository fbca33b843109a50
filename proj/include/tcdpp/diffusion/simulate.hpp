#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tcdpp/core/errors.hpp"
#include "tcdpp/core/random.hpp"
#include "tcdpp/core/summation.hpp"
#include "tcdpp/diffusion/sde.hpp"
#include "tcdpp/measures/finite_measure.hpp"
#include "tcdpp/pathspace/path.hpp"

namespace tcdpp::diffusion {

// A control rule sees the grid index, the current state and the start point.
// Anything it needs from the past has to be recomputed from those, which
// keeps every rule non-anticipating by construction.
struct Policy {
  std::string name;
  std::function<std::size_t(std::size_t k, const double* x, const double* x0)> rule;
  std::size_t operator()(std::size_t k, const double* x, const double* x0) const { return rule(k, x, x0); }
};

using PolicyClass = std::vector<Policy>;

inline std::size_t neutral_label(const ControlledSDE& sde) {
  std::size_t best = 0;
  for (std::size_t a = 1; a < sde.n_labels(); ++a)
    if (std::abs(sde.labels[a]) < std::abs(sde.labels[best])) best = a;
  return best;
}

namespace policies {

inline Policy constant(const ControlledSDE& sde, std::size_t a) {
  return {"const:" + std::to_string(sde.labels.at(a)), [a](std::size_t, const double*, const double*) { return a; }};
}

// Push coordinate 0 towards c with the largest label of the right sign.
inline Policy bang_bang(const ControlledSDE& sde, double c) {
  std::size_t lo = 0, hi = 0, mid = neutral_label(sde);
  for (std::size_t a = 0; a < sde.n_labels(); ++a) {
    if (sde.labels[a] < sde.labels[lo]) lo = a;
    if (sde.labels[a] > sde.labels[hi]) hi = a;
  }
  return {"bang:" + std::to_string(c), [=](std::size_t, const double* x, const double*) {
            return x[0] < c ? hi : x[0] > c ? lo : mid;
          }};
}

// Hold label a until coordinate 0 leaves the r-ball around the start, then
// hand over to `then`.
inline Policy until_exit(const ControlledSDE& sde, std::size_t a, double r, Policy then) {
  std::string name = "hold:" + std::to_string(sde.labels.at(a)) + "/" + then.name;
  return {name, [a, r, then](std::size_t k, const double* x, const double* x0) {
            return std::abs(x[0] - x0[0]) < r ? a : then(k, x, x0);
          }};
}

inline PolicyClass constants(const ControlledSDE& sde) {
  PolicyClass out;
  for (std::size_t a = 0; a < sde.n_labels(); ++a) out.push_back(constant(sde, a));
  return out;
}

}  // namespace policies

// When the path is stopped at grid index k (evaluated after the state at k is
// known).
struct StopRule {
  std::string name;
  std::function<bool(std::size_t k, double elapsed, const double* x, const double* x0)> stop;
};

namespace stops {

inline StopRule never() {
  return {"never", [](std::size_t, double, const double*, const double*) { return false; }};
}

inline StopRule at_time(double t) {
  return {"time:" + std::to_string(t),
          [t](std::size_t, double e, const double*, const double*) { return e >= t - 1e-12; }};
}

// inf{t : |xi_t - x0| >= r} ^ r, distance in coordinate 0.
inline StopRule ball_exit(double r) {
  return {"ball:" + std::to_string(r), [r](std::size_t, double e, const double* x, const double* x0) {
            return std::abs(x[0] - x0[0]) >= r || e >= r - 1e-12;
          }};
}

}  // namespace stops

struct SimSpec {
  double dt = 1.0 / 256;
  std::size_t paths = 1000;
  std::uint64_t seed = 0;
  double horizon = std::numeric_limits<double>::quiet_NaN();  // default: from the time coordinate
};

namespace detail {

inline std::size_t steps_for(const ControlledSDE& sde, const Vec& x0, const SimSpec& spec) {
  double T = spec.horizon;
  if (std::isnan(T)) {
    if (!sde.has_time()) throw PreconditionError("no time coordinate and no horizon given");
    T = sde.horizon() - x0[sde.time_coord];
  }
  if (!(spec.dt > 0) || !(T >= 0)) throw PreconditionError("need dt > 0 and a nonnegative horizon");
  double q = T / spec.dt;
  auto n = static_cast<std::size_t>(std::llround(q));
  if (std::abs(q - static_cast<double>(n)) > 1e-9 * std::max(1.0, q)) throw PreconditionError("dt does not divide horizon");
  return n;
}

}  // namespace detail

// Euler-Maruyama with absorption. visit(k, x, label, absorbed) is called at
// every grid index; returning false ends the path early. The label is the
// control on the cell [t_k, t_{k+1}).
template <class Visit>
void simulate_path(const ControlledSDE& sde, const Policy& pol, const Vec& x0, double dt, std::size_t steps,
                   std::uint64_t seed, std::uint64_t path, Visit&& visit) {
  const std::size_t n = sde.dim, d = sde.noise();
  thread_local Vec x, b, s, z;
  x.assign(x0.begin(), x0.end());
  b.resize(n);
  s.resize(n * n);
  z.resize(n);
  Stream rng(seed, path);
  bool absorbed = !sde.inside(x.data());
  const double sq = std::sqrt(dt);
  for (std::size_t k = 0;; ++k) {
    std::size_t a = pol(k, x.data(), x0.data());
    if (!visit(k, static_cast<const double*>(x.data()), a, absorbed) || k == steps) return;
    if (absorbed) continue;
    sde.beta(x.data(), a, b.data());
    sde.sigma(x.data(), a, s.data());
    for (std::size_t j = 0; j < d; ++j) z[j] = rng.normal();
    for (std::size_t i = 0; i < n; ++i) {
      double dx = b[i] * dt;
      for (std::size_t j = 0; j < d; ++j) dx += s[i * n + j] * sq * z[j];
      x[i] += dx;
      if (!std::isfinite(x[i]))
        throw SimulationError("non-finite state (seed " + std::to_string(seed) + ", path " + std::to_string(path) +
                              ", step " + std::to_string(k + 1) + ")");
    }
    if (!sde.inside(x.data())) {
      sde.project(x.data());
      absorbed = true;
    }
  }
}

// Paths of the product (xi, alpha): a ContinuousPL state and a ControlClass
// record of the labels.
inline EmpiricalMeasure<Path> simulate(const ControlledSDE& sde, const Policy& pol, const Vec& x0, const SimSpec& spec) {
  if (x0.size() != sde.dim || !sde.in_closure(x0.data())) throw PreconditionError("x0 outside the closure of O");
  const std::size_t steps = detail::steps_for(sde, x0, spec);
  TimeGrid grid(spec.dt, steps);
  std::vector<Path> out;
  out.reserve(spec.paths);
  for (std::size_t p = 0; p < spec.paths; ++p) {
    Component xi{PathKind::ContinuousPL, sde.dim, {}};
    Component al{PathKind::ControlClass, 1, {}};
    al.labels = sde.n_labels();
    al.neutral = static_cast<double>(neutral_label(sde));
    simulate_path(sde, pol, x0, spec.dt, steps, spec.seed, p, [&](std::size_t, const double* x, std::size_t a, bool) {
      xi.values.insert(xi.values.end(), x, x + sde.dim);
      al.values.push_back(static_cast<double>(a));
      return true;
    });
    out.emplace_back(grid, std::vector<Component>{std::move(xi), std::move(al)});
  }
  return EmpiricalMeasure<Path>(std::move(out), spec.seed);
}

// The labels the policy assigns along a given state path (component 0).
inline Path controls_of(const ControlledSDE& sde, const Policy& pol, const Path& xi) {
  const auto& c = xi.component(0);
  Vec x0(c.values.begin(), c.values.begin() + static_cast<std::ptrdiff_t>(c.dim));
  std::vector<int> labels;
  for (std::size_t k = 0; k < xi.grid().size(); ++k)
    labels.push_back(static_cast<int>(pol(k, c.values.data() + k * c.dim, x0.data())));
  return Path::control(xi.grid(), labels, sde.n_labels(), static_cast<int>(neutral_label(sde)));
}

// Constant after the first grid index outside O.
inline bool is_absorbed_path(const ControlledSDE& sde, const Path& w) {
  const auto& c = w.component(0);
  bool hit = false;
  for (std::size_t k = 0; k < w.grid().size(); ++k) {
    const double* x = c.values.data() + k * c.dim;
    if (hit) {
      for (std::size_t i = 0; i < c.dim; ++i)
        if (x[i] != x[i - c.dim]) return false;
    } else {
      hit = !sde.inside(x);
    }
  }
  return true;
}

struct ValueEstimate {
  double value = 0;
  double stderr_ = 0;
  std::size_t argmax = 0;
  std::vector<MeanEstimate> per_policy;
};

// max over the class of MC means of G = g(xi_T). All policies share the same
// per-path streams, so enlarging the class can only raise the estimate.
inline ValueEstimate estimate_value(const ControlledSDE& sde, const PolicyClass& pols, const Payoff& g, const Vec& x0,
                                    const SimSpec& spec) {
  if (pols.empty()) throw PreconditionError("empty policy class");
  if (x0.size() != sde.dim || !sde.in_closure(x0.data())) throw PreconditionError("x0 outside the closure of O");
  const std::size_t steps = detail::steps_for(sde, x0, spec);
  ValueEstimate out;
  std::vector<double> vals(spec.paths);
  for (const auto& pol : pols) {
    for (std::size_t p = 0; p < spec.paths; ++p)
      simulate_path(sde, pol, x0, spec.dt, steps, spec.seed, p,
                    [&](std::size_t k, const double* x, std::size_t, bool absorbed) {
                      if (k < steps && !absorbed) return true;
                      vals[p] = g(x);
                      return false;
                    });
    out.per_policy.push_back(mean_estimate(vals));
  }
  for (std::size_t i = 1; i < pols.size(); ++i)
    if (out.per_policy[i].mean > out.per_policy[out.argmax].mean) out.argmax = i;
  out.value = out.per_policy[out.argmax].mean;
  out.stderr_ = out.per_policy[out.argmax].stderr_;
  return out;
}

struct DppMcReport {
  double lhs = 0, rhs = 0, stderr_ = 0, z = 0;
  std::size_t argmax = 0;
  std::vector<MeanEstimate> per_policy;
};

using ValueFn = std::function<double(const double* x)>;

// lhs = vhat(x0); rhs = max over the class of E[vhat(xi_tau) 1{tau <= T} +
// G 1{tau never fires}]. lhs is deterministic, so the stderr is the rhs one.
inline DppMcReport check_dpp_mc(const ControlledSDE& sde, const PolicyClass& pols, const Payoff& g, const Vec& x0,
                                const StopRule& tau, const ValueFn& vhat, const SimSpec& spec) {
  if (pols.empty()) throw PreconditionError("empty policy class");
  if (x0.size() != sde.dim || !sde.in_closure(x0.data())) throw PreconditionError("x0 outside the closure of O");
  const std::size_t steps = detail::steps_for(sde, x0, spec);
  DppMcReport out;
  out.lhs = vhat(x0.data());
  std::vector<double> vals(spec.paths);
  for (const auto& pol : pols) {
    for (std::size_t p = 0; p < spec.paths; ++p)
      simulate_path(sde, pol, x0, spec.dt, steps, spec.seed, p, [&](std::size_t k, const double* x, std::size_t, bool) {
        if (tau.stop(k, spec.dt * static_cast<double>(k), x, x0.data())) {
          vals[p] = vhat(x);
          return false;
        }
        if (k == steps) vals[p] = g(x);
        return true;
      });
    out.per_policy.push_back(mean_estimate(vals));
  }
  for (std::size_t i = 1; i < pols.size(); ++i)
    if (out.per_policy[i].mean > out.per_policy[out.argmax].mean) out.argmax = i;
  out.rhs = out.per_policy[out.argmax].mean;
  out.stderr_ = out.per_policy[out.argmax].stderr_;
  double d = out.lhs - out.rhs;
  out.z = out.stderr_ > 0 ? d / out.stderr_ : d == 0 ? 0 : std::copysign(std::numeric_limits<double>::infinity(), d);
  return out;
}

struct ResidualReport {
  double max_abs_mean = 0;  // largest |E[dM h]| over increments and features
  double max_abs_z = 0;
  std::size_t worst_increment = 0, worst_feature = 0;
};

// M_t = f(xi_t) - f(xi_0) - int_0^{t ^ tau_dO} G^{alpha_u} f(xi_u) du on each
// path (left rectangle rule). Increments over blocks of `block` steps are
// tested against the features {1, xi^i_s} at the block start. The
// standardized residual divides by sqrt(stderr^2 + quad_tol^2); quad_tol
// defaults to dt times the block length, the rectangle-rule error scale,
// so that noiseless coordinates do not report pure quadrature error as bias.
inline ResidualReport martingale_residual(const ControlledSDE& sde, const EmpiricalMeasure<Path>& law, const TestFn& f,
                                          std::size_t block, std::optional<double> quad_tol = std::nullopt) {
  const auto& first = law.samples().front();
  const std::size_t n = sde.dim, K = first.grid().steps();
  const double dt = first.grid().step();
  if (block == 0 || block > K) throw PreconditionError("block must be in [1, steps]");
  const std::size_t blocks = K / block, feats = n + 1;
  std::vector<std::vector<double>> prod(blocks * feats, std::vector<double>(law.size()));
  std::vector<double> M(K + 1);
  for (std::size_t p = 0; p < law.size(); ++p) {
    const auto& w = law.samples()[p];
    const auto& xi = w.component(0);
    const auto& al = w.component(1);
    const double* x = xi.values.data();
    double integral = 0;
    bool absorbed = !sde.inside(x);
    M[0] = 0;
    for (std::size_t k = 0; k < K; ++k) {
      const double* xk = x + k * n;
      if (!absorbed) integral += generator(sde, f, xk, static_cast<std::size_t>(al.at(k))) * dt;
      const double* xn = x + (k + 1) * n;
      if (!absorbed) absorbed = !sde.inside(xn);
      M[k + 1] = f.value(xn) - f.value(x) - integral;
    }
    for (std::size_t j = 0; j < blocks; ++j) {
      double d = M[(j + 1) * block] - M[j * block];
      const double* xs = x + j * block * n;
      prod[j * feats][p] = d;
      for (std::size_t i = 0; i < n; ++i) prod[j * feats + 1 + i][p] = d * xs[i];
    }
  }
  const double tol = quad_tol ? *quad_tol : dt * dt * static_cast<double>(block);
  ResidualReport out;
  for (std::size_t j = 0; j < blocks; ++j)
    for (std::size_t q = 0; q < feats; ++q) {
      auto e = mean_estimate(prod[j * feats + q]);
      double den = std::hypot(e.stderr_, tol);
      double z = den > 0 ? std::abs(e.mean) / den : (e.mean == 0 ? 0 : std::numeric_limits<double>::infinity());
      out.max_abs_mean = std::max(out.max_abs_mean, std::abs(e.mean));
      if (z > out.max_abs_z) {
        out.max_abs_z = z;
        out.worst_increment = j;
        out.worst_feature = q;
      }
    }
  return out;
}

// Left-continuous label path whose value at t_k is the label nearest to the
// average of the label index over ((t_k - 1/n)^+, t_k). At t_0 the window is
// empty and the first cell's label is used.
inline Path progressive_version(const Path& alpha, double n) {
  if (!(n >= 1)) throw PreconditionError("progressive_version needs n >= 1");
  const auto& c = alpha.component(0);
  if (c.kind != PathKind::ControlClass) throw UnsupportedKind("progressive_version needs a ControlClass path");
  const double dt = alpha.grid().step(), w = 1.0 / n;
  const std::size_t K = alpha.grid().steps();
  std::vector<double> out(K + 1);
  out[0] = c.at(0);
  for (std::size_t k = 1; k <= K; ++k) {
    double t = dt * static_cast<double>(k), from = std::max(0.0, t - w);
    double acc = 0, len = 0;
    for (std::size_t j = k; j-- > 0;) {
      double a = dt * static_cast<double>(j), b = dt * static_cast<double>(j + 1);
      double ov = std::min(b, t) - std::max(a, from);
      if (ov <= 0) break;
      acc += ov * c.at(j);
      len += ov;
    }
    double avg = acc / len;
    double lab = std::floor(avg + 0.5);
    out[k] = std::min(std::max(lab, 0.0), static_cast<double>(c.labels - 1));
  }
  return Path::caglad(alpha.grid(), out);
}

}  // namespace tcdpp::diffusion
