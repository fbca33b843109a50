#pragma once

#include <functional>
#include <string>
#include <tuple>
#include <vector>

#include "tcdpp/concat/concatenation.hpp"
#include "tcdpp/pathspace/checks.hpp"

namespace tcdpp {

template <class W>
struct Triple {
  W w;
  GridTime t;
  W w2;
};

// All compatible (w, t, w2) with w, w2 drawn from the sample and t finite.
template <TcSpace S>
std::vector<Triple<typename S::point_type>> compatible_triples(const S& s,
                                                               const std::vector<typename S::point_type>& sample) {
  std::vector<Triple<typename S::point_type>> out;
  for (const auto& a : sample)
    for (std::size_t k = 0; k <= s.grid().steps(); ++k)
      for (const auto& b : sample)
        if (s.compatible(a, GridTime(k), b)) out.push_back({a, GridTime(k), b});
  return out;
}

// G(w *_t w2) = G(w2) on every sampled compatible triple.
template <TcSpace S, class G>
CheckResult<typename S::point_type> is_tail_map(const S& s, const G& g,
                                                const std::vector<Triple<typename S::point_type>>& triples) {
  for (const auto& tr : triples) {
    if (tr.t.is_infinite() || !s.compatible(tr.w, tr.t, tr.w2)) continue;
    if (!(g(s.concat(tr.w, tr.t, tr.w2)) == g(tr.w2))) {
      auto r = CheckResult<typename S::point_type>::fail(tr.w, tr.t, "G(w *_t w2) != G(w2)");
      r.witness2 = tr.w2;
      return r;
    }
  }
  return {};
}

// F is a TC-morphism into real paths started at 0 with adjusted concatenation.
// tol = 0 demands exact equality.
template <TcSpace S, class F>
CheckResult<typename S::point_type> is_tc_morphism(const S& s, const F& f,
                                                   const std::vector<typename S::point_type>& sample,
                                                   double tol = 0) {
  using W = typename S::point_type;
  const Concatenation target(ConcatRule::Adjusted);
  auto close = [tol](const Path& a, const Path& b) {
    if (tol == 0) return a == b;
    if (a.grid().size() != b.grid().size() || a.dim() != b.dim()) return false;
    for (std::size_t k = 0; k < a.grid().size(); ++k)
      for (std::size_t i = 0; i < a.dim(); ++i)
        if (std::fabs(a(k, i) - b(k, i)) > tol) return false;
    return true;
  };
  for (const auto& w : sample) {
    Path fw = f(w);
    for (std::size_t i = 0; i < fw.dim(); ++i)
      if (fw(0, i) != 0) return CheckResult<W>::fail(w, GridTime(0), "F(w)(0) != 0");
    for (std::size_t k = 0; k <= s.grid().steps(); ++k) {
      GridTime t(k);
      if (!close(truncate(f(s.truncate(w, t)), t), truncate(fw, t)))
        return CheckResult<W>::fail(w, t, "F is anticipating");
    }
  }
  for (const auto& a : sample) {
    Path fa = f(a);
    for (std::size_t k = 0; k <= s.grid().steps(); ++k) {
      GridTime t(k);
      for (const auto& b : sample) {
        if (!s.compatible(a, t, b)) continue;
        if (!close(f(s.concat(a, t, b)), target.concat(fa, t, f(b)))) {
          auto r = CheckResult<W>::fail(a, t, "F(w *_t w2) != F(w) * F(w2)");
          r.witness2 = b;
          return r;
        }
      }
    }
  }
  return {};
}

// tau'_w(w2) = tau(w *_kappa w2) - kappa(w), INFINITY when kappa(w) is
// infinite or w2 is not compatible.
template <TcSpace S>
BasicStoppingTime<typename S::point_type> split_stopping_time(const S& s,
                                                              const BasicStoppingTime<typename S::point_type>& tau,
                                                              const BasicStoppingTime<typename S::point_type>& kappa,
                                                              const typename S::point_type& w) {
  GridTime k = kappa(w);
  GridTime tw = tau(w);
  if (tw < k) throw PreconditionError("split_stopping_time needs tau >= kappa; fails at kappa=" + k.str());
  return BasicStoppingTime<typename S::point_type>(
      tau.name() + "|" + kappa.name(), [s, tau, k, w](const typename S::point_type& w2) {
        if (k.is_infinite() || !s.compatible(w, k, w2)) return GridTime::infinity();
        GridTime full = tau(s.concat(w, k, w2));
        if (full < k) throw PreconditionError("split_stopping_time needs tau >= kappa on concatenations");
        if (full.is_infinite()) return full;
        return GridTime(full.index() - k.index());
      });
}

// tau(w) = kappa(w) + sigma(theta_kappa w); sums past the horizon are
// reported as INFINITY.
template <TcSpace S>
BasicStoppingTime<typename S::point_type> compose_shifted_stopping_time(
    const S& s, const BasicStoppingTime<typename S::point_type>& kappa,
    const BasicStoppingTime<typename S::point_type>& sigma) {
  return BasicStoppingTime<typename S::point_type>(
      kappa.name() + "+" + sigma.name(), [s, kappa, sigma](const typename S::point_type& w) {
        GridTime k = kappa(w);
        if (k.is_infinite()) return k;
        GridTime r = sigma(s.shift(k, w));
        if (r.is_infinite()) return r;
        std::size_t sum = k.index() + r.index();
        return sum > s.grid().steps() ? GridTime::infinity() : GridTime(sum);
      });
}

struct FactorResult {
  bool factors_through = true;
  bool is_factor = true;
};

// X_t(w) = X(T_t w). Checks X_t(w) = X_0(w2) => compatible and the converse.
template <TcSpace S, class X>
FactorResult factors_through_state(const S& s, const X& x, const std::vector<typename S::point_type>& sample) {
  FactorResult r;
  for (const auto& a : sample)
    for (std::size_t k = 0; k <= s.grid().steps(); ++k) {
      GridTime t(k);
      auto xa = x(s.truncate(a, t));
      for (const auto& b : sample) {
        bool same = xa == x(s.truncate(b, GridTime(0)));
        bool comp = s.compatible(a, t, b);
        if (same && !comp) r.factors_through = false;
        if (comp && !same) r.is_factor = false;
      }
    }
  return r;
}

}  // namespace tcdpp
