#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tcdpp/dpp/tree.hpp"
#include "tcdpp/martingale/functional.hpp"

namespace tcdpp {

// Every kernel on `incs` with probabilities in {0, 1/q, ..., 1}; zero
// entries are dropped.
template <class S>
std::vector<TreeKernel<S>> lattice_kernels(const std::vector<double>& incs, long long q) {
  if (incs.empty() || q < 1) throw PreconditionError("lattice kernels need increments and q >= 1");
  std::vector<TreeKernel<S>> out;
  std::vector<long long> c(incs.size(), 0);
  std::function<void(std::size_t, long long)> rec = [&](std::size_t i, long long left) {
    if (i + 1 == incs.size()) {
      c[i] = left;
      TreeKernel<S> k;
      for (std::size_t j = 0; j < incs.size(); ++j)
        if (c[j] > 0) k.steps.emplace_back(incs[j], ScalarTraits<S>::from_ratio(c[j], q));
      out.push_back(std::move(k));
      return;
    }
    for (long long v = 0; v <= left; ++v) {
      c[i] = v;
      rec(i + 1, left - v);
    }
  };
  rec(0, q);
  return out;
}

// Mean-zero lattice kernels, enumerated from the mean constraint directly.
template <class S>
std::vector<TreeKernel<S>> unbiased_lattice_kernels(const std::vector<double>& incs, long long q) {
  std::vector<TreeKernel<S>> out;
  for (auto& k : lattice_kernels<S>(incs, q)) {
    S mean(0);
    for (const auto& [d, p] : k.steps) mean += p * ScalarTraits<S>::from_double(d);
    if (mean == S(0)) out.push_back(std::move(k));
  }
  return out;
}

// Martingale tree: walks with increments `incs` over `depth` steps and
// integer payoffs. The candidate laws are all history-dependent products of
// lattice kernels.
template <class S>
struct MartTree {
  std::size_t depth = 2;
  std::vector<double> incs{-1, 1};
  long long q = 8;
  std::map<double, S> payoff;
  std::size_t budget = 200000;

  double max_jump() const {
    double m = 0;
    for (double d : incs) m = std::max(m, std::fabs(d));
    return m;
  }
  TreeModel<S> candidates() const { return TreeModel<S>(depth, lattice_kernels<S>(incs, q), {}, payoff, 0, budget); }
  TreeModel<S> unbiased() const {
    return TreeModel<S>(depth, unbiased_lattice_kernels<S>(incs, q), {}, payoff, 0, budget);
  }
};

// Payoff table y -> small integer, over every reachable level.
template <class S>
std::map<double, S> random_payoff(std::uint64_t seed, std::size_t depth, double max_jump) {
  Stream rng(seed, 0x7061);
  std::map<double, S> out;
  const double span = max_jump * static_cast<double>(depth);
  for (double y = -span; y <= span; ++y) out[y] = S(rng.uniform_int(-4, 4));
  return out;
}

// P(w) = Pbar(X(w)): the candidate laws started at X(w) under which every
// functional in D is a canonical local martingale.
template <class S>
ControlCorrespondence<S> generate_correspondence(const std::vector<TestFunctional>& d,
                                                 std::function<State(const Path&)> x,
                                                 std::function<MeasureSet<S>(const State&)> candidates) {
  return ControlCorrespondence<S>::factored(x, [d, x, candidates](const State& s) {
    MeasureSet<S> out;
    for (auto& mu : candidates(s)) {
      bool ok = true;
      for (const auto& [w, m] : mu.atoms())
        if (x(truncate(w, GridTime(0))) != s) ok = false;
      if (!ok) continue;
      QStopFamily qs = QStopFamily::finest(mu);
      for (const auto& f : d)
        if (!(ok = is_canonical_local_mart(f, mu, qs).ok)) break;
      if (ok) out.push_back(std::move(mu));
    }
    return out;
  });
}

// Conditional law of theta_kappa given X_kappa = x, grouped over the
// support; states not charged by mu use `fallback`.
template <class S>
Kernel<S> state_conditional_kernel(const PathSpace& sp, const FiniteMeasure<S>& mu, const StoppingTime& kappa,
                                   std::function<State(const Path&)> x, Kernel<S> fallback) {
  std::map<State, std::vector<std::pair<Path, S>>> cells;
  std::map<State, S> mass;
  for (const auto& [w, m] : mu.atoms()) {
    GridTime t = kappa(w);
    if (t.is_infinite()) continue;
    State key = x(sp.truncate(w, t));
    cells[key].emplace_back(sp.shift(t, w), m);
    mass[key] += m;
  }
  std::map<State, FiniteMeasure<S>> laws;
  for (auto& [key, atoms] : cells) {
    for (auto& a : atoms) a.second /= mass[key];
    laws.emplace(key, FiniteMeasure<S>(std::move(atoms)));
  }
  return [sp, kappa, x, laws = std::move(laws), fallback = std::move(fallback)](const Path& w) {
    auto it = laws.find(x(sp.truncate(w, kappa(w))));
    return it != laws.end() ? it->second : fallback(w);
  };
}

template <class S>
struct MartDppReport {
  bool tc_morphisms = true;
  bool locally_bounded = true;
  bool factor_of_state = true;
  bool tail_map = true;
  std::vector<std::string> failures;
  DppReport<S> dpp;
  bool dpp_computed = false;
  bool hypotheses() const { return tc_morphisms && locally_bounded && factor_of_state && tail_map; }
};

// Checks the hypotheses on `sample`, then runs the DPP on the generated
// correspondence. Hypothesis failures are reported, not thrown.
template <class S>
MartDppReport<S> verify_dpp_mart(const PathSpace& sp, const std::vector<TestFunctional>& d,
                                 std::function<State(const Path&)> x,
                                 std::function<MeasureSet<S>(const State&)> candidates, const Objective<S>& g,
                                 const StoppingTime& tau, const Path& w, const std::vector<Path>& sample) {
  MartDppReport<S> r;
  const std::size_t levels = static_cast<std::size_t>(std::ceil(sp.grid().horizon())) + 4;
  for (const auto& f : d) {
    if (auto c = is_tc_morphism(sp, f, sample); !c.ok) {
      r.tc_morphisms = false;
      r.failures.push_back(f.name + ": " + c.detail);
    }
    if (auto c = is_canonically_locally_bounded(f, sample, levels); !c.ok) {
      r.locally_bounded = false;
      r.failures.push_back(c.detail);
    }
  }
  auto fac = factors_through_state(sp, x, sample);
  if (!fac.is_factor || !fac.factors_through) {
    r.factor_of_state = false;
    r.failures.push_back("concatenation is not a factor of the state map");
  }
  auto p = generate_correspondence<S>(d, x, candidates);
  try {
    if (auto c = tail_check_on_supports(sp, p, g, w); !c.ok) {
      r.tail_map = false;
      r.failures.push_back("objective: " + c.detail);
    }
    r.dpp = verify_dpp(sp, p, g, tau, w, static_cast<const ValueFunction<S>*>(nullptr), false);
    r.dpp_computed = true;
  } catch (const InvariantError& e) {
    r.failures.push_back(std::string("no DPP: ") + e.what());
  }
  return r;
}

}  // namespace tcdpp
