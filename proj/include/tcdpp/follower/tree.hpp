#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tcdpp/follower/left_integral.hpp"
#include "tcdpp/martingale/generated.hpp"

namespace tcdpp::follower {

// Finite-tree follower. Paths carry Y = (r, W) with r the remaining steps, Z =
// (L, C) and the control alpha. Each step picks an up-probability for W +- 1,
// a push in {0, 1} and a bookkeeping rule for Z. The correct rule is
// Z_{k+1} = Z_k + c(Y_k) (alpha_{k+1} - alpha_k) with c(r, W) = (rate, price(W));
// the wrong one moves L by one extra unit. It is only offered at
// nodes with r = depth, i.e. on the first step from the root, which keeps the
// candidate universe small and still closed under concatenation.
template <class S>
struct FollowerTree {
  std::size_t depth = 3;
  std::vector<S> up_probs{S(1) / S(2), S(3) / S(4)};
  std::vector<double> pushes{0, 1};
  double rate = 1;                      // c for L
  double price_pos = 1, price_neg = 2;  // c for C: fuel price for W >= 0 and W < 0
  double w0 = 0;
  std::size_t budget = 100000;

  TimeGrid grid() const { return TimeGrid(1.0, depth); }
  PathSpace space() const {
    return PathSpace(grid(), Concatenation({ConcatRule::Strict, ConcatRule::Strict, ConcatRule::Adjusted}));
  }

  double price(double w) const { return w >= 0 ? price_pos : price_neg; }

  // (r, W, L, C) at the last index; alpha is not part of the state.
  static State state(const Path& w) {
    const std::size_t k = w.grid().steps();
    const auto &y = w.component(0), &z = w.component(1);
    return {y.at(k, 0), y.at(k, 1), z.at(k, 0), z.at(k, 1)};
  }

  Path point_path(const State& x) const {
    const std::size_t n = grid().size();
    Component y{PathKind::CadlagStep, 2, {}}, z{PathKind::CaglladStep, 2, {}}, a{PathKind::CaglladStep, 1, {}};
    for (std::size_t k = 0; k < n; ++k) {
      y.values.insert(y.values.end(), {x[0], x[1]});
      z.values.insert(z.values.end(), {x[2], x[3]});
      a.values.push_back(0);
    }
    a.nondecreasing = true;
    return Path(grid(), {std::move(y), std::move(z), std::move(a)});
  }

  Path root() const { return point_path({static_cast<double>(depth), w0, 0, 0}); }

  // Minimized cost C_T + (W_T - L_T)^2, negated for the max-form engine.
  Objective<S> objective() const {
    return [](const Path& w) {
      State x = state(w);
      double d = x[1] - x[2];
      return -(ScalarTraits<S>::from_double(x[3]) + ScalarTraits<S>::from_double(d * d));
    };
  }

  // c(Y) for coordinate i of Z, as the integrand path.
  Path coupling(const Path& w, std::size_t i) const {
    std::vector<double> v;
    for (std::size_t k = 0; k < w.grid().size(); ++k) v.push_back(i == 0 ? rate : price(w(k, 1)));
    return Path::cadlag(w.grid(), std::move(v));
  }

  // Every history-dependent choice of the per-node options, from x.
  MeasureSet<S> candidates(const State& x) const {
    if (x.size() != 4) throw PreconditionError("follower tree states are (r, W, L, C)");
    auto it = cache_->find(x);
    if (it != cache_->end()) return it->second;
    MeasureSet<S> out;
    const auto r = static_cast<std::size_t>(x[0]);
    if (r == 0) {
      out.push_back(FiniteMeasure<S>::dirac(point_path(x)));
    } else {
      const PathSpace sp = space();
      const std::size_t rules = r == depth ? 2 : 1;
      for (const auto& pu : up_probs)
        for (double da : pushes)
          for (std::size_t rule = 0; rule < rules; ++rule) {
            double dl = rate * da + (rule == 1 ? 1 : 0);
            double dc = price(x[1]) * da;
            std::vector<std::pair<Path, S>> steps;
            std::vector<MeasureSet<S>> kids;
            for (int s : {1, -1}) {
              S pr = s == 1 ? pu : S(1) - pu;
              if (pr == S(0)) continue;
              State y{x[0] - 1, x[1] + s, x[2] + dl, x[3] + dc};
              steps.emplace_back(step_path(x, y, da), pr);
              kids.push_back(candidates(y));
            }
            std::size_t total = 1;
            for (const auto& k : kids) {
              total *= k.size();
              if (total > budget) throw PreconditionError("follower tree exceeds the enumeration budget");
            }
            std::vector<std::size_t> idx(kids.size(), 0);
            for (;;) {
              std::vector<std::pair<Path, S>> atoms;
              for (std::size_t i = 0; i < kids.size(); ++i)
                for (const auto& [w2, m2] : kids[i][idx[i]].atoms())
                  atoms.emplace_back(sp.concat(steps[i].first, GridTime(1), w2), steps[i].second * m2);
              out.emplace_back(std::move(atoms));
              std::size_t i = 0;
              while (i < idx.size() && ++idx[i] == kids[i].size()) idx[i++] = 0;
              if (i == idx.size()) break;
            }
          }
      if (out.size() > budget) throw PreconditionError("follower tree exceeds the enumeration budget");
    }
    return cache_->emplace(x, std::move(out)).first->second;
  }

  // Z matches the left integral of c(Y) against alpha on every support path.
  bool bookkeeping_ok(const Path& w) const {
    Path a = project(w, 2);
    for (std::size_t i = 0; i < 2; ++i) {
      std::vector<double> zeta;
      for (std::size_t k = 0; k < w.grid().size(); ++k) zeta.push_back(w.component(1).at(k, i));
      if (!left_integral_characterization(zeta, coupling(w, i), a)) return false;
    }
    return true;
  }

  std::vector<TestFunctional> functionals() const {
    return {functionals::increment(1, 1), functionals::compensated_square(1, 0, 1)};
  }

  ControlCorrespondence<S> continuous_part() const {
    auto self = std::make_shared<const FollowerTree>(*this);
    return generate_correspondence<S>(functionals(), &FollowerTree::state,
                                      [self](const State& x) { return self->candidates(x); });
  }

  ControlCorrespondence<S> bookkeeping_part() const {
    auto self = std::make_shared<const FollowerTree>(*this);
    return ControlCorrespondence<S>::factored(&FollowerTree::state, [self](const State& x) {
      MeasureSet<S> out;
      for (auto& mu : self->candidates(x)) {
        bool ok = true;
        for (const auto& [w, m] : mu.atoms()) ok = ok && self->bookkeeping_ok(w);
        if (ok) out.push_back(std::move(mu));
      }
      return out;
    });
  }

  std::vector<StoppingTime> stopping_times() const {
    std::vector<StoppingTime> out;
    for (std::size_t k = 0; k <= depth; ++k) out.push_back(StoppingTime::constant(GridTime(k)));
    out.emplace_back("gap-exit:1", [](const Path& w) {
      for (std::size_t k = 0; k < w.grid().size(); ++k)
        if (std::abs(w(k, 1) - w(k, 2)) >= 1) return GridTime(k);
      return GridTime::infinity();
    });
    out.push_back(StoppingTime::never());
    return out;
  }

 private:
  Path step_path(const State& x, const State& y, double da) const {
    const std::size_t n = grid().size();
    Component yc{PathKind::CadlagStep, 2, {}}, z{PathKind::CaglladStep, 2, {}}, a{PathKind::CaglladStep, 1, {}};
    for (std::size_t k = 0; k < n; ++k) {
      const State& p = k == 0 ? x : y;
      yc.values.insert(yc.values.end(), {p[0], p[1]});
      z.values.insert(z.values.end(), {p[2], p[3]});
      a.values.push_back(k == 0 ? 0 : da);
    }
    a.nondecreasing = true;
    return Path(grid(), {std::move(yc), std::move(z), std::move(a)});
  }

  std::shared_ptr<std::map<State, MeasureSet<S>>> cache_ = std::make_shared<std::map<State, MeasureSet<S>>>();
};

template <class S>
struct SplitReport {
  std::size_t candidates = 0, continuous = 0, bookkeeping = 0, intersection = 0;  // law counts at the root
  PropertyWitness concat_continuous, concat_bookkeeping, disintegrable;
  std::vector<DppReport<S>> dpp;  // one per stopping time
  std::vector<std::string> failures;
  S value{};
  bool ok() const { return failures.empty(); }
};

// P = P_c cap P_l on the tree: P_c from the martingale functionals of W, P_l
// by filtering on the left-integral characterization. Checks P_c and P_l for
// concatenability, the intersection for disintegrability and the DPP exactly.
template <class S>
SplitReport<S> check_correspondence_split(const FollowerTree<S>& tree, const PropertyOptions& opt = {},
                                          std::size_t sample_laws = 4) {
  SplitReport<S> r;
  const PathSpace sp = tree.space();
  const Path root = tree.root();
  auto pc = tree.continuous_part();
  auto pl = tree.bookkeeping_part();
  auto p = combine<S>({pc, pl}, CombineMode::Intersection);
  r.candidates = tree.candidates(FollowerTree<S>::state(root)).size();
  r.continuous = pc(root)->size();
  r.bookkeeping = pl(root)->size();
  r.intersection = p(root)->size();

  std::set<Path> sample{root};
  auto set = p(root);
  const std::size_t n = std::min(sample_laws, set->size());
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& [w, m] : (*set)[i * set->size() / n].atoms())
      for (std::size_t k = 0; k <= tree.depth; ++k) sample.insert(truncate(w, GridTime(k)));
  std::vector<Path> paths(sample.begin(), sample.end());
  auto taus = tree.stopping_times();

  r.concat_continuous = check_concatenable(sp, pc, taus, paths, opt);
  if (!r.concat_continuous) r.failures.push_back("P_c not concatenable: " + r.concat_continuous.detail);
  r.concat_bookkeeping = check_concatenable(sp, pl, taus, paths, opt);
  if (!r.concat_bookkeeping) r.failures.push_back("P_l not concatenable: " + r.concat_bookkeeping.detail);
  r.disintegrable = check_disintegrable(sp, p, taus, paths, opt, true);
  if (!r.disintegrable) r.failures.push_back("intersection not disintegrable: " + r.disintegrable.detail);

  auto g = tree.objective();
  ValueFunction<S> v(p, g);
  r.value = v(root);
  for (const auto& tau : taus) {
    auto d = verify_dpp(sp, p, g, tau, root, &v, &tau == &taus.front());
    if (!d.equal()) r.failures.push_back("DPP fails at tau=" + tau.name());
    r.dpp.push_back(d);
  }
  return r;
}

}  // namespace tcdpp::follower
