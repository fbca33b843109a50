#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "tcdpp/measures/operations.hpp"

namespace tcdpp {

using State = std::vector<double>;

template <class S>
using MeasureSet = std::vector<FiniteMeasure<S>>;

// omega -> nonempty finite set of laws. When built from a state map X the
// assignment is assign_bar(X(omega)), and sets are cached per state.
template <class S>
class ControlCorrespondence {
 public:
  using SetPtr = std::shared_ptr<const MeasureSet<S>>;

  ControlCorrespondence() = default;

  static ControlCorrespondence direct(std::function<MeasureSet<S>(const Path&)> assign) {
    ControlCorrespondence p;
    p.direct_ = std::move(assign);
    return p;
  }

  static ControlCorrespondence factored(std::function<State(const Path&)> x,
                                        std::function<MeasureSet<S>(const State&)> assign_bar) {
    ControlCorrespondence p;
    p.state_ = std::move(x);
    p.bar_ = std::move(assign_bar);
    p.cache_ = std::make_shared<std::map<State, SetPtr>>();
    return p;
  }

  bool is_factored() const { return static_cast<bool>(state_); }
  State state(const Path& w) const { return state_(w); }

  // Not thread-safe: the per-state cache is filled lazily.
  SetPtr at_state(const State& x) const {
    auto it = cache_->find(x);
    if (it != cache_->end()) return it->second;
    auto set = normalize(bar_(x));
    cache_->emplace(x, set);
    return set;
  }

  SetPtr operator()(const Path& w) const {
    try {
      if (is_factored()) return at_state(state_(w));
      return normalize(direct_(w));
    } catch (const InvariantError& e) {
      throw InvariantError(std::string(e.what()) + " at\n" + to_csv(w));
    }
  }

  // Exact membership: atom-list equality after canonical sorting.
  bool contains(const Path& w, const FiniteMeasure<S>& mu) const {
    auto set = (*this)(w);
    return std::binary_search(set->begin(), set->end(), mu);
  }

 private:
  static SetPtr normalize(MeasureSet<S> set) {
    if (set.empty()) throw InvariantError("control correspondence is empty at some point");
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
    return std::make_shared<const MeasureSet<S>>(std::move(set));
  }

  std::function<MeasureSet<S>(const Path&)> direct_;
  std::function<State(const Path&)> state_;
  std::function<MeasureSet<S>(const State&)> bar_;
  std::shared_ptr<std::map<State, SetPtr>> cache_;
};

enum class CombineMode { Union, Intersection };

template <class S>
ControlCorrespondence<S> combine(const std::vector<ControlCorrespondence<S>>& ps, CombineMode mode) {
  if (ps.empty()) throw PreconditionError("combine needs at least one correspondence");
  auto merge = [ps, mode](auto&& get) {
    MeasureSet<S> acc = *get(ps[0]);
    for (std::size_t i = 1; i < ps.size(); ++i) {
      const auto& next = *get(ps[i]);
      MeasureSet<S> out;
      if (mode == CombineMode::Union)
        std::set_union(acc.begin(), acc.end(), next.begin(), next.end(), std::back_inserter(out));
      else
        std::set_intersection(acc.begin(), acc.end(), next.begin(), next.end(), std::back_inserter(out));
      acc = std::move(out);
    }
    if (acc.empty()) throw InvariantError("empty intersection of control correspondences");
    return acc;
  };
  bool factored = std::all_of(ps.begin(), ps.end(), [](const auto& p) { return p.is_factored(); });
  if (factored)
    return ControlCorrespondence<S>::factored([p0 = ps[0]](const Path& w) { return p0.state(w); },
                                              [merge](const State& x) {
                                                return merge([&x](const auto& p) { return p.at_state(x); });
                                              });
  return ControlCorrespondence<S>::direct([merge](const Path& w) { return merge([&w](const auto& p) { return p(w); }); });
}

}  // namespace tcdpp
