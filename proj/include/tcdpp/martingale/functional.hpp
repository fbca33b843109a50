#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tcdpp/measures/finite_measure.hpp"
#include "tcdpp/pathspace/checks.hpp"

namespace tcdpp {

// Non-anticipating map into real cadlag paths started at 0. `bounds(n)`, when
// present, is the canonical local bound M_n of the stopped functional.
struct TestFunctional {
  std::string name;
  std::function<Path(const Path&)> apply;
  std::function<double(std::size_t)> bounds;

  Path operator()(const Path& w) const { return apply(w); }
};

// Grid index of tau_n = inf{t : |F_t| >= n} ^ n.
inline std::size_t stop_index(const Path& f, std::size_t n) {
  const TimeGrid& g = f.grid();
  std::size_t cap = g.steps();
  double tn = static_cast<double>(n);
  if (tn < g.horizon()) cap = static_cast<std::size_t>(std::floor(tn / g.step() + 1e-9));
  for (std::size_t k = 0; k < cap; ++k)
    if (std::fabs(f(k)) >= tn) return k;
  return cap;
}

inline Path stop_path(Path f, std::size_t n) {
  std::size_t tau = stop_index(f, n);
  Component& c = f.component(0);
  for (std::size_t k = tau + 1; k < f.grid().size(); ++k) c.at(k) = c.at(tau);
  return f;
}

// F^n_t = F_{tau_n ^ t}.
inline TestFunctional stop_functional(const TestFunctional& f, std::size_t n) {
  if (n < 1) throw PreconditionError("stop_functional needs n >= 1");
  return {f.name + "^" + std::to_string(n), [f, n](const Path& w) { return stop_path(f(w), n); }, f.bounds};
}

namespace functionals {

inline Path real_path(const TimeGrid& g, std::vector<double> v) { return Path::cadlag(g, std::move(v)); }

// w_t - w_0 on coordinate `coord` of the first component.
inline TestFunctional increment(std::size_t coord, double max_jump) {
  return {"increment",
          [coord](const Path& w) {
            std::vector<double> v;
            for (std::size_t k = 0; k < w.grid().size(); ++k) v.push_back(w(k, coord) - w(0, coord));
            return real_path(w.grid(), std::move(v));
          },
          [max_jump](std::size_t n) { return static_cast<double>(n) + max_jump; }};
}

// y_t^2 - y_0^2 - (r_0 - r_t): the square compensated by the number of steps
// taken, r being a remaining-steps counter.
inline TestFunctional compensated_square(std::size_t ycoord, std::size_t rcoord, double max_jump) {
  return {"compensated-square",
          [ycoord, rcoord](const Path& w) {
            std::vector<double> v;
            double y0 = w(0, ycoord), r0 = w(0, rcoord);
            for (std::size_t k = 0; k < w.grid().size(); ++k)
              v.push_back(w(k, ycoord) * w(k, ycoord) - y0 * y0 - (r0 - w(k, rcoord)));
            return real_path(w.grid(), std::move(v));
          },
          [max_jump](std::size_t n) { return static_cast<double>(n) + max_jump; }};
}

// (w_t - w_0)^2 - t. A martingale functional for unit steps, but not
// additive under concatenation.
inline TestFunctional naive_square(std::size_t coord, double max_jump) {
  return {"naive-square",
          [coord](const Path& w) {
            std::vector<double> v;
            for (std::size_t k = 0; k < w.grid().size(); ++k) {
              double d = w(k, coord) - w(0, coord);
              v.push_back(d * d - w.grid().time(k));
            }
            return real_path(w.grid(), std::move(v));
          },
          [max_jump](std::size_t n) { return static_cast<double>(n) + max_jump; }};
}

inline TestFunctional zero() {
  return {"zero", [](const Path& w) { return real_path(w.grid(), std::vector<double>(w.grid().size(), 0.0)); },
          [](std::size_t n) { return static_cast<double>(n); }};
}

}  // namespace functionals

// Desk-scale QStop: QTime is the grid, Pi_q the atoms of sigma(T_q) on a
// finite set of paths, each atom identified by its truncation at q.
class QStopFamily {
 public:
  QStopFamily(TimeGrid g, const std::vector<Path>& support) : grid_(g), pi_(g.size()) {
    for (std::size_t q = 0; q < g.size(); ++q) {
      std::set<Path> cells;
      for (const auto& w : support) cells.insert(truncate(w, GridTime(q)));
      pi_[q].assign(cells.begin(), cells.end());
    }
  }

  template <class S>
  static QStopFamily finest(const FiniteMeasure<S>& mu) {
    std::vector<Path> support;
    for (const auto& [w, m] : mu.atoms()) support.push_back(w);
    if (support.empty()) throw PreconditionError("QStop family of an empty measure");
    return QStopFamily(support.front().grid(), support);
  }

  const TimeGrid& grid() const { return grid_; }
  std::size_t qtimes() const { return grid_.size(); }
  const std::vector<Path>& cells(std::size_t q) const { return pi_.at(q); }
  bool in(std::size_t q, std::size_t cell, const Path& w) const { return truncate(w, GridTime(q)) == pi_[q][cell]; }

  // q 1_A + r 1_{A^c} for q <= r and A in Pi_q.
  std::vector<StoppingTime> qstops() const {
    std::vector<StoppingTime> out;
    for (std::size_t q = 0; q < grid_.size(); ++q)
      for (std::size_t r = q; r < grid_.size(); ++r)
        for (std::size_t a = 0; a < pi_[q].size(); ++a)
          out.emplace_back("q" + std::to_string(q) + "A" + std::to_string(a) + "r" + std::to_string(r),
                           [q, r, cell = pi_[q][a]](const Path& w) {
                             return truncate(w, GridTime(q)) == cell ? GridTime(q) : GridTime(r);
                           });
    return out;
  }

 private:
  TimeGrid grid_;
  std::vector<std::vector<Path>> pi_;
};

struct MartWitness {
  bool ok = true;
  std::size_t n = 0, q = 0, r = 0;
  std::optional<Path> cell;
  std::string detail;
  explicit operator bool() const { return ok; }
};

namespace detail {

template <class S>
bool is_zero(const S& x) {
  if constexpr (ScalarTraits<S>::exact) return x == 0;
  else return std::fabs(x) <= 1e-10;
}

// Largest useful n: beyond it F^n = F on the support.
template <class S>
std::size_t stop_levels(const TestFunctional& f, const FiniteMeasure<S>& mu) {
  double mx = 0;
  double horizon = 0;
  for (const auto& [w, m] : mu.atoms()) {
    Path fw = f(w);
    horizon = w.grid().horizon();
    for (std::size_t k = 0; k < fw.grid().size(); ++k) mx = std::max(mx, std::fabs(fw(k)));
  }
  return std::max<std::size_t>(static_cast<std::size_t>(std::ceil(mx)) + 1,
                               static_cast<std::size_t>(std::ceil(horizon)));
}

template <class S>
S val(const Path& p, std::size_t k) {
  return ScalarTraits<S>::from_double(p(k));
}

}  // namespace detail

// E[F^n_r 1_A] = E[F^n_q 1_A] for all n, q < r in QTime and A in Pi_q.
template <class S>
MartWitness is_canonical_local_mart(const TestFunctional& f, const FiniteMeasure<S>& mu, const QStopFamily& qs) {
  const std::size_t levels = detail::stop_levels(f, mu);
  for (std::size_t n = 1; n <= levels; ++n) {
    std::vector<Path> fn;
    for (const auto& [w, m] : mu.atoms()) fn.push_back(stop_path(f(w), n));
    for (std::size_t q = 0; q < qs.qtimes(); ++q)
      for (std::size_t a = 0; a < qs.cells(q).size(); ++a)
        for (std::size_t r = q + 1; r < qs.qtimes(); ++r) {
          S acc(0);
          std::size_t i = 0;
          for (const auto& [w, m] : mu.atoms()) {
            if (qs.in(q, a, w)) acc += m * (detail::val<S>(fn[i], r) - detail::val<S>(fn[i], q));
            ++i;
          }
          if (!detail::is_zero(acc))
            return {false, n, q, r, qs.cells(q)[a], f.name + ": E[F^n_r 1_A] - E[F^n_q 1_A] = " + format_scalar(acc)};
        }
  }
  return {};
}

// Independent test: one-step conditional means of F^n vanish on every cell
// of sigma(T_k) charged by mu.
template <class S>
MartWitness is_martingale_onestep(const TestFunctional& f, const FiniteMeasure<S>& mu) {
  const std::size_t levels = detail::stop_levels(f, mu);
  for (std::size_t n = 1; n <= levels; ++n) {
    std::map<std::pair<std::size_t, Path>, S> drift;
    for (const auto& [w, m] : mu.atoms()) {
      Path fn = stop_path(f(w), n);
      for (std::size_t k = 0; k + 1 < w.grid().size(); ++k)
        drift[{k, truncate(w, GridTime(k))}] += m * (detail::val<S>(fn, k + 1) - detail::val<S>(fn, k));
    }
    for (const auto& [key, d] : drift)
      if (!detail::is_zero(d)) return {false, n, key.first, key.first + 1, key.second, f.name + ": one-step drift"};
  }
  return {};
}

// E[Y^n_{tau ^ kappa} - Y^n_kappa] = 0 = E[Y^n_{tau v kappa} - Y^n_kappa] for
// all n and tau in QStop. An infinite kappa reads Y^n at the horizon.
template <class S>
MartWitness mart_char_at(const TestFunctional& y, const StoppingTime& kappa, const FiniteMeasure<S>& mu,
                         const QStopFamily& qs) {
  const std::size_t levels = detail::stop_levels(y, mu);
  auto taus = qs.qstops();
  for (std::size_t n = 1; n <= levels; ++n) {
    std::vector<Path> yn;
    std::vector<std::size_t> kap;
    for (const auto& [w, m] : mu.atoms()) {
      yn.push_back(stop_path(y(w), n));
      GridTime k = kappa(w);
      kap.push_back(k.is_infinite() ? w.grid().steps() : k.index());
    }
    for (const auto& tau : taus) {
      S lo(0), hi(0);
      std::size_t i = 0;
      for (const auto& [w, m] : mu.atoms()) {
        std::size_t t = tau(w).index();
        S base = detail::val<S>(yn[i], kap[i]);
        lo += m * (detail::val<S>(yn[i], std::min(t, kap[i])) - base);
        hi += m * (detail::val<S>(yn[i], std::max(t, kap[i])) - base);
        ++i;
      }
      if (!detail::is_zero(lo) || !detail::is_zero(hi))
        return {false, n, 0, 0, std::nullopt, y.name + ": nonzero mean at " + tau.name() + " with kappa=" + kappa.name()};
    }
  }
  return {};
}

// |F^n(w)_t| <= M_n on the sample for n up to `levels`.
inline CheckResult<Path> is_canonically_locally_bounded(const TestFunctional& f, const std::vector<Path>& sample,
                                                        std::size_t levels) {
  if (!f.bounds) return CheckResult<Path>::fail(sample.front(), GridTime(0), f.name + " declares no bounds");
  for (const auto& w : sample) {
    Path fw = f(w);
    for (std::size_t n = 1; n <= levels; ++n) {
      Path fn = stop_path(fw, n);
      for (std::size_t k = 0; k < fn.grid().size(); ++k)
        if (std::fabs(fn(k)) > f.bounds(n))
          return CheckResult<Path>::fail(w, GridTime(k), f.name + " exceeds M_" + std::to_string(n));
    }
  }
  return {};
}

}  // namespace tcdpp
