#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tcdpp/concat/checks.hpp"
#include "tcdpp/dpp/correspondence.hpp"

namespace tcdpp {

template <class S>
using Objective = std::function<S(const Path&)>;

// v(w) = max over P(w) of the integral of G.
template <class S>
S value(const ControlCorrespondence<S>& p, const Objective<S>& g, const Path& w) {
  auto set = p(w);
  S best = integrate(set->front(), g);
  for (std::size_t i = 1; i < set->size(); ++i) {
    S v = integrate((*set)[i], g);
    if (v > best) best = v;
  }
  return best;
}

// Memoized value function; by state when P is factored, by path otherwise.
template <class S>
class ValueFunction {
 public:
  ValueFunction(ControlCorrespondence<S> p, Objective<S> g) : p_(std::move(p)), g_(std::move(g)) {}

  S operator()(const Path& w) const {
    if (p_.is_factored()) {
      State x = p_.state(w);
      auto it = by_state_.find(x);
      if (it != by_state_.end()) return it->second;
      S v = value(p_, g_, w);
      by_state_.emplace(std::move(x), v);
      return v;
    }
    auto it = by_path_.find(w);
    if (it != by_path_.end()) return it->second;
    S v = value(p_, g_, w);
    by_path_.emplace(w, v);
    return v;
  }

 private:
  ControlCorrespondence<S> p_;
  Objective<S> g_;
  mutable std::map<State, S> by_state_;
  mutable std::map<Path, S> by_path_;
};

// Selector picking, at each w, the lowest-index measure whose integral is
// within eps of v(w) (above 1/eps when v(w) = +inf).
template <class S>
std::function<FiniteMeasure<S>(const Path&)> eps_selector(const ControlCorrespondence<S>& p, const Objective<S>& g,
                                                         S eps) {
  return [p, g, eps](const Path& w) {
    auto set = p(w);
    Extended<S> thr = eps_threshold(Extended<S>(value(p, g, w)), eps);
    for (const auto& mu : *set)
      if (Extended<S>(integrate(mu, g)) >= thr) return mu;
    throw InvariantError("eps_selector found no eps-optimal measure");
  };
}

template <class S>
struct DppReport {
  S lhs{};
  S rhs{};
  bool geq = false;
  bool leq = false;
  bool equal() const { return geq && leq; }
};

// Tail-map check on triples drawn from supports of P: G is unchanged by
// replacing a path's head with the head of its own truncation, and by
// pasting a continuation drawn from P at the truncation.
template <class S>
CheckResult<Path> tail_check_on_supports(const PathSpace& sp, const ControlCorrespondence<S>& p,
                                         const Objective<S>& g, const Path& w, std::size_t max_measures = 4) {
  auto set = p(w);
  std::vector<Triple<Path>> triples;
  for (std::size_t i = 0; i < std::min(max_measures, set->size()); ++i)
    for (const auto& [a, m] : (*set)[i].atoms())
      for (std::size_t k = 0; k <= sp.grid().steps(); ++k) {
        GridTime t(k);
        triples.push_back({a, t, sp.shift(t, a)});
        Path head = sp.truncate(a, t);
        for (auto set2 = p(head); const auto& [b, m2] : set2->front().atoms()) triples.push_back({a, t, b});
      }
  return is_tail_map(sp, g, triples);
}

// Both sides of the dynamic programming principle at w:
//   v(w)  vs  max_mu E^mu[ v(T_tau) 1{tau < inf} + G 1{tau = inf} ].
template <class S>
DppReport<S> verify_dpp(const PathSpace& sp, const ControlCorrespondence<S>& p, const Objective<S>& g,
                        const StoppingTime& tau, const Path& w, const ValueFunction<S>* v_cached = nullptr,
                        bool check_tail = true) {
  if (check_tail) {
    auto tail = tail_check_on_supports(sp, p, g, w);
    if (!tail.ok) throw PreconditionError("objective is not a tail map: " + tail.detail);
  }
  std::optional<ValueFunction<S>> own;
  if (!v_cached) own.emplace(p, g);
  const ValueFunction<S>& v = v_cached ? *v_cached : *own;
  DppReport<S> r;
  r.lhs = v(w);
  auto set = p(w);
  bool first = true;
  for (const auto& mu : *set) {
    S acc(0);
    for (const auto& [a, m] : mu.atoms()) {
      GridTime t = tau(a);
      acc += m * (t.is_infinite() ? g(a) : v(sp.truncate(a, t)));
    }
    if (first || acc > r.rhs) r.rhs = acc;
    first = false;
  }
  r.geq = !(r.lhs < r.rhs);
  r.leq = !(r.rhs < r.lhs);
  return r;
}

struct PropertyWitness {
  bool ok = true;
  std::string detail;
  explicit operator bool() const { return ok; }
};

namespace detail {

inline std::uint64_t mix(std::uint64_t x) {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  return x ^ (x >> 33);
}

inline std::uint64_t path_hash(const Path& w) {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (std::size_t k = 0; k < w.grid().size(); ++k)
    for (std::size_t i = 0; i < w.dim(); ++i) h = mix(h ^ std::hash<double>{}(w(k, i)));
  return h;
}

}  // namespace detail

// Selector family used by the property checks: always-first, always-last and
// pseudo-random per-path choices.
template <class S>
std::vector<Kernel<S>> selector_family(const ControlCorrespondence<S>& p, std::size_t random_selectors,
                                       std::uint64_t seed) {
  std::vector<Kernel<S>> out;
  out.push_back([p](const Path& w) { return p(w)->front(); });
  out.push_back([p](const Path& w) { return p(w)->back(); });
  for (std::size_t i = 0; i < random_selectors; ++i)
    out.push_back([p, salt = detail::mix(seed + i)](const Path& w) {
      auto set = p(w);
      return (*set)[detail::mix(detail::path_hash(w) ^ salt) % set->size()];
    });
  return out;
}

struct PropertyOptions {
  std::size_t max_measures = 50;   // measures of P(w) examined per w
  std::size_t random_selectors = 2;
  std::uint64_t seed = 0;
};

// mu *_tau nu stays in P(w) for sampled w, mu in P(w), tau and selectors nu.
template <class S>
PropertyWitness check_concatenable(const PathSpace& sp, const ControlCorrespondence<S>& p,
                                   const std::vector<StoppingTime>& taus, const std::vector<Path>& sample,
                                   const PropertyOptions& opt = {}) {
  auto selectors = selector_family(p, opt.random_selectors, opt.seed);
  for (const auto& w : sample) {
    auto set = p(w);
    std::size_t n = std::min(opt.max_measures, set->size());
    for (std::size_t i = 0; i < n; ++i) {
      // spread the examined measures over the whole set
      const auto& mu = (*set)[i * set->size() / n];
      for (const auto& tau : taus)
        for (std::size_t s = 0; s < selectors.size(); ++s) {
          auto comp = compatible(sp, mu, tau, selectors[s]);
          if (!comp.ok)
            return {false, "selector " + std::to_string(s) + " incompatible with a support path at tau=" + tau.name()};
          auto cat = concat_measure(sp, mu, tau, selectors[s]);
          if (!p.contains(w, cat))
            return {false, "mu *_tau nu not in P(w): tau=" + tau.name() + " selector=" + std::to_string(s) +
                               " measure=" + std::to_string(i) + "\n" + to_csv(w)};
        }
    }
  }
  return {};
}

// For sampled w, mu in P(w), tau: the exact conditional kernel of theta_tau
// given w_{<=tau}, repaired on null cells by a selector of P, is a selector of
// P and reproduces mu. Null cells are probed at the truncations of the
// sample paths.
template <class S>
PropertyWitness check_disintegrable(const PathSpace& sp, const ControlCorrespondence<S>& p,
                                    const std::vector<StoppingTime>& taus, const std::vector<Path>& sample,
                                    const PropertyOptions& opt = {}, bool repair_null_cells = true) {
  Kernel<S> repair;
  if (repair_null_cells) repair = [p](const Path& w) { return p(w)->front(); };
  for (const auto& w : sample) {
    auto set = p(w);
    std::size_t n = std::min(opt.max_measures, set->size());
    for (std::size_t i = 0; i < n; ++i) {
      const auto& mu = (*set)[i * set->size() / n];
      for (const auto& tau : taus) {
        Kernel<S> nu = conditional_kernel(sp, mu, tau, repair);
        std::vector<Path> probes;
        for (const auto& [a, m] : mu.atoms()) probes.push_back(a);
        probes.insert(probes.end(), sample.begin(), sample.end());
        for (const auto& q : probes) {
          GridTime t = tau(q);
          if (t.is_infinite()) continue;
          Path head = sp.truncate(q, t);
          if (!p.contains(head, nu(head)))
            return {false, "conditional kernel leaves P at tau=" + tau.name() + " measure=" + std::to_string(i) +
                               "\n" + to_csv(head)};
        }
        if (!(concat_measure(sp, mu, tau, nu) == mu))
          return {false, "mu *_tau nu != mu at tau=" + tau.name()};
      }
    }
  }
  return {};
}

}  // namespace tcdpp
