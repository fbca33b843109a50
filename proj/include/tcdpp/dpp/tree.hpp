#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tcdpp/core/random.hpp"
#include "tcdpp/dpp/engine.hpp"

namespace tcdpp {

// One-step transition: increments of y with their probabilities.
template <class S>
struct TreeKernel {
  std::vector<std::pair<double, S>> steps;
};

enum class TreeVariant {
  Closed,      // all history-dependent choices among the base kernels
  ConcatOnly,  // first step from base kernels, later steps may also use extras
  DisintOnly,  // one base kernel used at every node (open loop)
};

inline const char* variant_name(TreeVariant v) {
  switch (v) {
    case TreeVariant::Closed: return "closed";
    case TreeVariant::ConcatOnly: return "concat-only";
    case TreeVariant::DisintOnly: return "disint-only";
  }
  return "?";
}

// Controlled random walk on a finite tree. Points are (r, y): r steps remain,
// y is the position. A path moves until r = 0 and then stays, so every law
// from a node is absorbed exactly at the horizon. The state of a path is its
// terminal point, which for truncated paths is the current point.
template <class S>
class TreeModel {
 public:
  using Key = std::pair<int, double>;

  TreeModel(std::size_t depth, std::vector<TreeKernel<S>> base, std::vector<TreeKernel<S>> extra,
            std::map<double, S> payoff, double y0 = 0, std::size_t budget = 20000)
      : grid_(1.0, depth),
        base_(std::move(base)),
        extra_(std::move(extra)),
        payoff_(std::move(payoff)),
        y0_(y0),
        budget_(budget) {
    if (depth == 0) throw PreconditionError("tree depth must be positive");
    if (base_.empty()) throw PreconditionError("tree needs at least one kernel");
    all_ = base_;
    all_.insert(all_.end(), extra_.begin(), extra_.end());
    for (const auto& k : all_) {
      S t(0);
      for (const auto& [d, p] : k.steps) {
        if (p <= 0) throw PreconditionError("kernel probabilities must be positive");
        t += p;
      }
      if (t != S(1)) throw PreconditionError("kernel probabilities must sum to 1");
    }
  }

  const TimeGrid& grid() const { return grid_; }
  std::size_t depth() const { return grid_.steps(); }
  PathSpace space() const { return PathSpace(grid_, Concatenation(ConcatRule::Strict)); }
  const std::vector<TreeKernel<S>>& base() const { return base_; }
  const std::vector<TreeKernel<S>>& extra() const { return extra_; }

  Path point_path(const State& x) const { return Path::constant(grid_, PathKind::CadlagStep, x); }
  Path root() const { return point_path({static_cast<double>(depth()), y0_}); }
  static State state(const Path& w) { return w.point(w.grid().steps()); }

  S g(double y) const {
    auto it = payoff_.find(y);
    if (it == payoff_.end()) throw PreconditionError("payoff undefined at y=" + format_double(y));
    return it->second;
  }
  Objective<S> objective() const {
    return [payoff = payoff_](const Path& w) {
      auto it = payoff.find(w(w.grid().steps(), 1));
      if (it == payoff.end()) throw PreconditionError("payoff undefined at the terminal point");
      return it->second;
    };
  }

  MeasureSet<S> laws(TreeVariant v, const State& x) const {
    Key key = to_key(x);
    switch (v) {
      case TreeVariant::Closed: return closed(key, base_, closed_base_);
      case TreeVariant::ConcatOnly: return augmented(key);
      case TreeVariant::DisintOnly: return open_loop(key);
    }
    return {};
  }

  ControlCorrespondence<S> correspondence(TreeVariant v) const {
    // the correspondence owns a copy, so it may outlive this model
    auto self = std::make_shared<const TreeModel>(*this);
    return ControlCorrespondence<S>::factored(&TreeModel::state, [self, v](const State& x) { return self->laws(v, x); });
  }

  // Root, every truncation of the support paths of the closed root laws, and
  // the full support paths; with_shifts adds their shifts, which start at
  // the intermediate nodes.
  std::vector<Path> sample_paths(std::size_t max_laws = 4, bool with_shifts = false) const {
    std::set<Path> out{root()};
    auto set = laws(TreeVariant::Closed, state(root()));
    for (std::size_t i = 0; i < std::min(max_laws, set.size()); ++i)
      for (const auto& [w, m] : set[i * set.size() / std::min(max_laws, set.size())].atoms())
        for (std::size_t k = 0; k <= depth(); ++k) {
          out.insert(truncate(w, GridTime(k)));
          if (with_shifts) out.insert(space().shift(GridTime(k), w));
        }
    return {out.begin(), out.end()};
  }

  // Constant times, first hits of each reachable y level, and INFINITY.
  std::vector<StoppingTime> stopping_times() const {
    std::vector<StoppingTime> out;
    for (std::size_t k = 0; k <= depth(); ++k) out.push_back(StoppingTime::constant(GridTime(k)));
    std::set<double> levels;
    for (const auto& [y, gy] : payoff_) levels.insert(y);
    for (double y : levels)
      if (y != y0_) out.push_back(first_at_level(1, y));
    out.push_back(StoppingTime::never());
    return out;
  }

  // Backward induction on states, independent of the path machinery.
  S oracle_value(TreeVariant v, const State& x) const {
    Key k = to_key(x);
    switch (v) {
      case TreeVariant::Closed: return bi_value(k, base_);
      case TreeVariant::ConcatOnly: return bi_first(k, [this](const Key& c) { return bi_value(c, all_); });
      case TreeVariant::DisintOnly: {
        S best = bi_fixed(k, base_[0], [this](const Key& c) { return g(c.second); }, -1);
        for (std::size_t j = 1; j < base_.size(); ++j)
          best = std::max(best, bi_fixed(k, base_[j], [this](const Key& c) { return g(c.second); }, -1));
        return best;
      }
    }
    return S(0);
  }

  // Right-hand side of the DPP for the constant time t, by backward induction.
  S oracle_rhs(TreeVariant v, const State& x, std::size_t t) const {
    Key k = to_key(x);
    auto vv = [this, v](const Key& c) { return oracle_value(v, {double(c.first), c.second}); };
    switch (v) {
      case TreeVariant::Closed: return bi_horizon(k, base_, vv, int(t));
      case TreeVariant::ConcatOnly:
        if (t == 0 || k.first == 0) return vv(k);
        return bi_first(k, [&](const Key& c) { return bi_horizon(c, all_, vv, int(t) - 1); });
      case TreeVariant::DisintOnly: {
        S best = bi_fixed(k, base_[0], vv, int(t));
        for (std::size_t j = 1; j < base_.size(); ++j) best = std::max(best, bi_fixed(k, base_[j], vv, int(t)));
        return best;
      }
    }
    return S(0);
  }

  // Law of the strategy that uses kernel choose(h) after the increments h.
  FiniteMeasure<S> strategy_law(const State& x, const std::function<std::size_t(const std::vector<double>&)>& choose) const {
    Key k = to_key(x);
    std::vector<std::pair<std::vector<double>, S>> front{{{}, S(1)}};
    for (int s = 0; s < k.first; ++s) {
      std::vector<std::pair<std::vector<double>, S>> next;
      for (const auto& [h, m] : front)
        for (const auto& [d, p] : base_.at(choose(h)).steps) {
          auto h2 = h;
          h2.push_back(d);
          next.emplace_back(std::move(h2), m * p);
        }
      front = std::move(next);
    }
    std::vector<std::pair<Path, S>> atoms;
    for (const auto& [h, m] : front) atoms.emplace_back(walk(k, h), m);
    return FiniteMeasure<S>(std::move(atoms));
  }

  // Laws of every history-dependent strategy, built by forward propagation
  // over explicit strategy tables. Exponential; small trees only.
  MeasureSet<S> strategy_laws(const State& x) const {
    Key k = to_key(x);
    if (k.first == 0) return {FiniteMeasure<S>::dirac(point_path(x))};
    std::set<double> incs;
    for (const auto& kr : base_)
      for (const auto& [d, p] : kr.steps) incs.insert(d);
    std::vector<std::vector<double>> nodes{{}};
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (int(nodes[i].size()) + 1 < k.first)
        for (double d : incs) {
          auto n = nodes[i];
          n.push_back(d);
          nodes.push_back(n);
        }
    std::map<std::vector<double>, std::size_t> index;
    for (std::size_t i = 0; i < nodes.size(); ++i) index[nodes[i]] = i;
    std::vector<std::size_t> choice(nodes.size(), 0);
    MeasureSet<S> out;
    for (;;) {
      out.push_back(strategy_law(x, [&](const std::vector<double>& h) { return choice[index.at(h)]; }));
      std::size_t i = 0;
      while (i < choice.size() && ++choice[i] == base_.size()) choice[i++] = 0;
      if (i == choice.size()) break;
    }
    return out;
  }

 private:
  using Cache = std::map<Key, MeasureSet<S>>;

  static Key to_key(const State& x) {
    if (x.size() != 2) throw PreconditionError("tree states are (r, y)");
    return {static_cast<int>(x[0]), x[1]};
  }

  // Path from k following the increments h, then absorbed.
  Path walk(const Key& k, const std::vector<double>& h) const {
    std::vector<double> v;
    int r = k.first;
    double y = k.second;
    for (std::size_t s = 0; s <= depth(); ++s) {
      v.push_back(r);
      v.push_back(y);
      if (s < h.size()) {
        --r;
        y += h[s];
      }
    }
    Component c;
    c.dim = 2;
    c.values = std::move(v);
    return Path(grid_, {std::move(c)});
  }

  // First step with kernel j, then a child law from sets[i] for outcome i.
  std::vector<FiniteMeasure<S>> expand(const Key& k, const TreeKernel<S>& kr,
                                       const std::vector<const MeasureSet<S>*>& sets) const {
    std::size_t total = 1;
    for (auto* s : sets) {
      total *= s->size();
      if (total > budget_) throw PreconditionError("tree instance exceeds the enumeration budget");
    }
    const PathSpace sp = space();
    std::vector<FiniteMeasure<S>> out;
    std::vector<std::size_t> idx(sets.size(), 0);
    for (;;) {
      std::vector<std::pair<Path, S>> atoms;
      for (std::size_t i = 0; i < sets.size(); ++i) {
        Path step = walk(k, {kr.steps[i].first});
        for (const auto& [w2, m2] : (*sets[i])[idx[i]].atoms())
          atoms.emplace_back(sp.concat(step, GridTime(1), w2), kr.steps[i].second * m2);
      }
      out.emplace_back(std::move(atoms));
      std::size_t i = 0;
      while (i < idx.size() && ++idx[i] == sets[i]->size()) idx[i++] = 0;
      if (i == idx.size()) break;
    }
    return out;
  }

  static Key child(const Key& k, double d) { return {k.first - 1, k.second + d}; }

  MeasureSet<S> closed(const Key& k, const std::vector<TreeKernel<S>>& kernels, Cache& cache) const {
    if (auto it = cache.find(k); it != cache.end()) return it->second;
    MeasureSet<S> out;
    if (k.first == 0) {
      out.push_back(FiniteMeasure<S>::dirac(point_path({0, k.second})));
    } else {
      for (const auto& kr : kernels) {
        std::vector<MeasureSet<S>> kids;
        for (const auto& [d, p] : kr.steps) kids.push_back(closed(child(k, d), kernels, cache));
        std::vector<const MeasureSet<S>*> ptr;
        for (const auto& s : kids) ptr.push_back(&s);
        auto part = expand(k, kr, ptr);
        out.insert(out.end(), part.begin(), part.end());
      }
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
      if (out.size() > budget_) throw PreconditionError("tree instance exceeds the enumeration budget");
    }
    return cache.emplace(k, std::move(out)).first->second;
  }

  MeasureSet<S> augmented(const Key& k) const {
    if (k.first == 0) return closed(k, all_, closed_all_);
    MeasureSet<S> out;
    for (const auto& kr : base_) {
      std::vector<MeasureSet<S>> kids;
      for (const auto& [d, p] : kr.steps) kids.push_back(closed(child(k, d), all_, closed_all_));
      std::vector<const MeasureSet<S>*> ptr;
      for (const auto& s : kids) ptr.push_back(&s);
      auto part = expand(k, kr, ptr);
      out.insert(out.end(), part.begin(), part.end());
    }
    return out;
  }

  MeasureSet<S> open_loop(const Key& k) const {
    MeasureSet<S> out;
    for (std::size_t j = 0; j < base_.size(); ++j) out.push_back(fixed_law(k, j));
    return out;
  }

  FiniteMeasure<S> fixed_law(const Key& k, std::size_t j) const {
    if (k.first == 0) return FiniteMeasure<S>::dirac(point_path({0, k.second}));
    std::vector<MeasureSet<S>> kids;
    for (const auto& [d, p] : base_[j].steps) kids.push_back({fixed_law(child(k, d), j)});
    std::vector<const MeasureSet<S>*> ptr;
    for (const auto& s : kids) ptr.push_back(&s);
    return expand(k, base_[j], ptr).front();
  }

  S bi_value(const Key& k, const std::vector<TreeKernel<S>>& kernels) const {
    if (k.first == 0) return g(k.second);
    bool first = true;
    S best(0);
    for (const auto& kr : kernels) {
      S acc(0);
      for (const auto& [d, p] : kr.steps) acc += p * bi_value(child(k, d), kernels);
      if (first || acc > best) best = acc;
      first = false;
    }
    return best;
  }

  template <class F>
  S bi_first(const Key& k, const F& cont) const {
    if (k.first == 0) return cont(k);
    bool first = true;
    S best(0);
    for (const auto& kr : base_) {
      S acc(0);
      for (const auto& [d, p] : kr.steps) acc += p * cont(child(k, d));
      if (first || acc > best) best = acc;
      first = false;
    }
    return best;
  }

  // max over strategies of E[f(point at s steps)], kernels chosen freely.
  template <class F>
  S bi_horizon(const Key& k, const std::vector<TreeKernel<S>>& kernels, const F& f, int s) const {
    if (s == 0 || k.first == 0) return f(k);
    bool first = true;
    S best(0);
    for (const auto& kr : kernels) {
      S acc(0);
      for (const auto& [d, p] : kr.steps) acc += p * bi_horizon(child(k, d), kernels, f, s - 1);
      if (first || acc > best) best = acc;
      first = false;
    }
    return best;
  }

  // E[f(point after s steps)] under one fixed kernel; s < 0 runs to absorption.
  template <class F>
  S bi_fixed(const Key& k, const TreeKernel<S>& kr, const F& f, int s) const {
    if (s == 0 || k.first == 0) return f(k);
    S acc(0);
    for (const auto& [d, p] : kr.steps) acc += p * bi_fixed(child(k, d), kr, f, s - 1);
    return acc;
  }

  TimeGrid grid_;
  std::vector<TreeKernel<S>> base_, extra_, all_;
  std::map<double, S> payoff_;
  double y0_;
  std::size_t budget_;
  mutable Cache closed_base_, closed_all_;
};

struct TreeParams {
  std::size_t depth = 2;
  std::size_t branching = 2;
  std::size_t kernels = 2;
  std::size_t extra = 1;
};

// Seeded random instance: increments from {-2..2}, kernels with random
// supports and small integer weights, integer payoffs in [-4, 4].
template <class S>
TreeModel<S> random_tree(std::uint64_t seed, const TreeParams& prm, std::size_t budget = 20000) {
  if (prm.depth < 1 || prm.depth > 5) throw PreconditionError("tree depth must be in [1, 5]");
  if (prm.branching < 1 || prm.branching > 3) throw PreconditionError("branching must be in [1, 3]");
  if (prm.kernels < 1 || prm.kernels > 4) throw PreconditionError("kernel count must be in [1, 4]");
  Stream rng(seed, 0x7472);
  std::vector<double> pool{-2, -1, 0, 1, 2};
  std::vector<double> incs;
  while (incs.size() < prm.branching) {
    double d = pool[rng.uniform_int(0, 4)];
    if (std::find(incs.begin(), incs.end(), d) == incs.end()) incs.push_back(d);
  }
  std::sort(incs.begin(), incs.end());
  auto make_kernel = [&] {
    std::vector<std::pair<double, long long>> w;
    for (double d : incs)
      if (rng.uniform_int(0, 3) != 0) w.emplace_back(d, rng.uniform_int(1, 4));
    if (w.empty()) w.emplace_back(incs[rng.uniform_int(0, incs.size() - 1)], 1);
    long long tot = 0;
    for (auto& [d, c] : w) tot += c;
    TreeKernel<S> k;
    for (auto& [d, c] : w) k.steps.emplace_back(d, ScalarTraits<S>::from_ratio(c, tot));
    return k;
  };
  std::vector<TreeKernel<S>> base, extra;
  for (std::size_t j = 0; j < prm.kernels; ++j) base.push_back(make_kernel());
  for (std::size_t j = 0; j < prm.extra; ++j) extra.push_back(make_kernel());
  std::map<double, S> payoff;
  const double span = 2.0 * prm.depth;
  for (double y = -span; y <= span; ++y) payoff[y] = S(rng.uniform_int(-4, 4));
  return TreeModel<S>(prm.depth, std::move(base), std::move(extra), std::move(payoff), 0, budget);
}

}  // namespace tcdpp
