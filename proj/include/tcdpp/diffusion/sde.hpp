#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "tcdpp/core/errors.hpp"
#include "tcdpp/core/random.hpp"

namespace tcdpp::diffusion {

using Vec = std::vector<double>;

// Coefficients write into caller-owned buffers so the simulation loop does
// not allocate. sigma is n x n, row-major.
struct ControlledSDE {
  using Drift = std::function<void(const double* x, std::size_t a, double* out)>;
  using Vol = std::function<void(const double* x, std::size_t a, double* out)>;
  using Envelope = std::function<double(const double* x)>;

  std::size_t dim = 1;
  // Brownian columns of sigma that are driven; the rest must be zero.
  // 0 means all n.
  std::size_t noise_dim = 0;
  Vec labels;  // control values; the label index is the control
  Drift beta;
  Vol sigma;
  // O is the open box (lo, hi); infinite ends are allowed.
  Vec lo, hi;
  Envelope beta_env, sigma_env;
  // Index of the time coordinate; out of range when time is not a coordinate.
  std::size_t time_coord = std::numeric_limits<std::size_t>::max();

  std::size_t n_labels() const { return labels.size(); }
  std::size_t noise() const { return noise_dim == 0 ? dim : noise_dim; }

  bool inside(const double* x) const {
    for (std::size_t i = 0; i < dim; ++i)
      if (!(x[i] > lo[i] && x[i] < hi[i])) return false;
    return true;
  }
  bool in_closure(const double* x) const {
    for (std::size_t i = 0; i < dim; ++i)
      if (!(x[i] >= lo[i] && x[i] <= hi[i])) return false;
    return true;
  }
  // Boundary projection used on the first exit.
  void project(double* x) const {
    for (std::size_t i = 0; i < dim; ++i) x[i] = std::min(hi[i], std::max(lo[i], x[i]));
  }
  // Signed distance to the complement of the box (positive inside).
  double signed_distance(const double* x) const {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < dim; ++i) d = std::min({d, x[i] - lo[i], hi[i] - x[i]});
    return d;
  }

  bool has_time() const { return time_coord < dim; }
  double horizon() const { return has_time() ? hi[time_coord] : std::numeric_limits<double>::infinity(); }
};

struct EnvelopeReport {
  bool ok = true;
  std::string detail;
};

// |beta^i| <= beta_env and |sigma^i_k| <= sigma_env on random points of the
// box intersected with [-clip, clip]^n.
inline EnvelopeReport check_envelopes(const ControlledSDE& sde, std::size_t samples, std::uint64_t seed,
                                      double clip = 10) {
  Stream rng(seed, 0);
  Vec x(sde.dim), b(sde.dim), s(sde.dim * sde.dim);
  for (std::size_t m = 0; m < samples; ++m) {
    for (std::size_t i = 0; i < sde.dim; ++i) {
      double l = std::max(sde.lo[i], -clip), h = std::min(sde.hi[i], clip);
      x[i] = l + (h - l) * rng.uniform();
    }
    for (std::size_t a = 0; a < sde.n_labels(); ++a) {
      sde.beta(x.data(), a, b.data());
      sde.sigma(x.data(), a, s.data());
      double be = sde.beta_env(x.data()), se = sde.sigma_env(x.data());
      for (double v : b)
        if (std::abs(v) > be) return {false, "drift exceeds envelope at sample " + std::to_string(m)};
      for (double v : s)
        if (std::abs(v) > se) return {false, "volatility exceeds envelope at sample " + std::to_string(m)};
    }
  }
  return {};
}

// A C^2 test function with closed-form derivatives.
struct TestFn {
  std::string name;
  std::function<double(const double*)> value;
  std::function<void(const double*, double*)> grad;  // n entries
  std::function<void(const double*, double*)> hess;  // n x n, row-major
};

// (G^a f)(x) = beta^i d_i f + 1/2 gamma^{ij} d_ij f, gamma = sigma sigma^T.
inline double generator(const ControlledSDE& sde, const TestFn& f, const double* x, std::size_t a) {
  const std::size_t n = sde.dim;
  Vec b(n), s(n * n), g(n), h(n * n);
  sde.beta(x, a, b.data());
  sde.sigma(x, a, s.data());
  f.grad(x, g.data());
  f.hess(x, h.data());
  double out = 0;
  for (std::size_t i = 0; i < n; ++i) out += b[i] * g[i];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double gam = 0;
      for (std::size_t k = 0; k < n; ++k) gam += s[i * n + k] * s[j * n + k];
      out += 0.5 * gam * h[i * n + j];
    }
  return out;
}

inline double hamiltonian(const ControlledSDE& sde, const TestFn& f, const double* x) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < sde.n_labels(); ++a) best = std::max(best, generator(sde, f, x, a));
  return best;
}

// Central-difference derivatives for functions given by value only.
inline TestFn numeric_test_fn(std::string name, std::size_t n, std::function<double(const double*)> f,
                              double h = 1e-4) {
  TestFn t;
  t.name = std::move(name);
  t.value = f;
  t.grad = [n, f, h](const double* x, double* g) {
    Vec y(x, x + n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = x[i] + h;
      double up = f(y.data());
      y[i] = x[i] - h;
      double dn = f(y.data());
      y[i] = x[i];
      g[i] = (up - dn) / (2 * h);
    }
  };
  t.hess = [n, f, h](const double* x, double* H) {
    Vec y(x, x + n);
    double f0 = f(x);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) {
          y[i] = x[i] + h;
          double up = f(y.data());
          y[i] = x[i] - h;
          double dn = f(y.data());
          y[i] = x[i];
          H[i * n + i] = (up - 2 * f0 + dn) / (h * h);
          continue;
        }
        double s = 0;
        for (int si : {1, -1})
          for (int sj : {1, -1}) {
            y[i] = x[i] + si * h;
            y[j] = x[j] + sj * h;
            s += si * sj * f(y.data());
          }
        y[i] = x[i];
        y[j] = x[j];
        H[i * n + j] = s / (4 * h * h);
      }
  };
  return t;
}

namespace detail {

// chi(r) = 1 on [0, R], 0 on [2R, inf), quintic smoothstep between (C^2).
struct Cutoff {
  double R;
  double u(double r) const { return (r - R) / R; }
  double value(double r) const {
    if (r <= R) return 1;
    if (r >= 2 * R) return 0;
    double s = u(r);
    return 1 - s * s * s * (10 - 15 * s + 6 * s * s);
  }
  double d1(double r) const {
    if (r <= R || r >= 2 * R) return 0;
    double s = u(r);
    return -30 * s * s * (1 - s) * (1 - s) / R;
  }
  double d2(double r) const {
    if (r <= R || r >= 2 * R) return 0;
    double s = u(r);
    return -60 * s * (1 - s) * (1 - 2 * s) / (R * R);
  }
};

// f~ = chi(|x|) p(x), with p given with its own derivatives.
inline TestFn cut(std::string name, std::size_t n, double R, std::function<double(const double*)> p,
                  std::function<void(const double*, double*)> dp, std::function<void(const double*, double*)> d2p) {
  Cutoff c{R};
  auto radius = [n](const double* x) {
    double r2 = 0;
    for (std::size_t i = 0; i < n; ++i) r2 += x[i] * x[i];
    return std::sqrt(r2);
  };
  TestFn t;
  t.name = std::move(name);
  t.value = [=](const double* x) { return c.value(radius(x)) * p(x); };
  t.grad = [=](const double* x, double* g) {
    double r = radius(x), ch = c.value(r), c1 = c.d1(r), pv = p(x);
    dp(x, g);
    for (std::size_t i = 0; i < n; ++i) {
      g[i] *= ch;
      if (c1 != 0) g[i] += c1 * x[i] / r * pv;
    }
  };
  t.hess = [=](const double* x, double* H) {
    double r = radius(x), ch = c.value(r), c1 = c.d1(r), c2 = c.d2(r), pv = p(x);
    Vec g(n);
    dp(x, g.data());
    d2p(x, H);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double& h = H[i * n + j];
        h *= ch;
        if (c1 == 0 && c2 == 0) continue;
        double ei = x[i] / r, ej = x[j] / r;
        double dchi_ij = c2 * ei * ej + c1 * ((i == j ? 1.0 : 0.0) - ei * ej) / r;
        h += dchi_ij * pv + c1 * ei * g[j] + c1 * ej * g[i];
      }
  };
  return t;
}

}  // namespace detail

// {x_i} and {x_i x_j} (ordered pairs), each cut off outside the ball of radius R.
inline std::vector<TestFn> qcoord_family(std::size_t n, double R) {
  if (!(R > 0)) throw PreconditionError("qcoord_family needs R > 0");
  std::vector<TestFn> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(detail::cut(
        "x" + std::to_string(i), n, R, [i](const double* x) { return x[i]; },
        [n, i](const double*, double* g) {
          for (std::size_t k = 0; k < n; ++k) g[k] = k == i ? 1 : 0;
        },
        [n](const double*, double* H) {
          for (std::size_t k = 0; k < n * n; ++k) H[k] = 0;
        }));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out.push_back(detail::cut(
          "x" + std::to_string(i) + "x" + std::to_string(j), n, R, [i, j](const double* x) { return x[i] * x[j]; },
          [n, i, j](const double* x, double* g) {
            for (std::size_t k = 0; k < n; ++k) g[k] = 0;
            g[i] += x[j];
            g[j] += x[i];
          },
          [n, i, j](const double*, double* H) {
            for (std::size_t k = 0; k < n * n; ++k) H[k] = 0;
            H[i * n + j] += 1;
            H[j * n + i] += 1;
          }));
  return out;
}

// Builtin coefficients. A spatial 1D model is lifted to the space-time state
// (x, t) on (lo, hi) x (-inf, horizon); time has drift 1 and no noise.
struct Model1D {
  std::string name;
  Vec labels;
  std::function<double(double x, double a)> b;
  std::function<double(double x, double a)> s;
  double lo = -2, hi = 2, horizon = 1;
  double b_bound = 1, s_bound = 1;  // sup |b|, sup |s| over the labels and the box
};

inline ControlledSDE space_time(const Model1D& m) {
  ControlledSDE sde;
  sde.dim = 2;
  sde.noise_dim = 1;
  sde.labels = m.labels;
  sde.time_coord = 1;
  auto labels = m.labels;
  auto b = m.b;
  auto s = m.s;
  sde.beta = [labels, b](const double* x, std::size_t a, double* out) {
    out[0] = b(x[0], labels[a]);
    out[1] = 1;
  };
  sde.sigma = [labels, s](const double* x, std::size_t a, double* out) {
    out[0] = s(x[0], labels[a]);
    out[1] = out[2] = out[3] = 0;
  };
  sde.lo = {m.lo, -std::numeric_limits<double>::infinity()};
  sde.hi = {m.hi, m.horizon};
  double bb = std::max(1.0, m.b_bound), sb = m.s_bound;
  sde.beta_env = [bb](const double*) { return bb; };
  sde.sigma_env = [sb](const double*) { return sb; };
  return sde;
}

// dX = a dt + sigma dW, a in labels.
inline Model1D controlled_drift(Vec labels, double sigma, double lo, double hi, double horizon) {
  double bmax = 0;
  for (double a : labels) bmax = std::max(bmax, std::abs(a));
  return {"control", labels, [](double, double a) { return a; }, [sigma](double, double) { return sigma; },
          lo, hi, horizon, bmax, std::abs(sigma)};
}

// dX = (a - theta x) dt + sigma dW.
inline Model1D ou_drift(Vec labels, double theta, double sigma, double lo, double hi, double horizon) {
  double bmax = 0;
  for (double a : labels) bmax = std::max(bmax, std::abs(a));
  bmax += std::abs(theta) * std::max(std::abs(lo), std::abs(hi));
  return {"ou", labels, [theta](double x, double a) { return a - theta * x; },
          [sigma](double, double) { return sigma; }, lo, hi, horizon, bmax, std::abs(sigma)};
}

// Terminal/boundary payoff on the state.
struct Payoff {
  std::string name;
  std::function<double(const double* x)> g;
  double operator()(const double* x) const { return g(x); }
};

inline Payoff bump(double center, double width) {
  return {"bump", [center, width](const double* x) {
            double z = (x[0] - center) / width;
            return std::exp(-0.5 * z * z);
          }};
}

// The benchmark: b = a in {-1, 0, 1}, sigma = 1, O = (-2, 2), horizon 1.
inline Model1D benchmark_model() { return controlled_drift({-1, 0, 1}, 1.0, -2, 2, 1); }
inline Payoff benchmark_payoff() { return bump(0.5, 0.5); }

}  // namespace tcdpp::diffusion
