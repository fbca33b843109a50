#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tcdpp/pathspace/truncation.hpp"

namespace tcdpp {

// Outcome of a property check; on failure carries the offending point and time.
template <class W>
struct CheckResult {
  bool ok = true;
  std::optional<W> witness;
  std::optional<W> witness2;
  GridTime time = GridTime::infinity();
  std::string detail;

  explicit operator bool() const { return ok; }

  static CheckResult fail(W w, GridTime t, std::string why) {
    CheckResult r;
    r.ok = false;
    r.witness = std::move(w);
    r.time = t;
    r.detail = std::move(why);
    return r;
  }
};

// Standard truncation on paths of a given grid.
struct PathTruncation {
  using point_type = Path;
  TimeGrid g;
  const TimeGrid& grid() const { return g; }
  Path truncate(const Path& w, GridTime t) const { return tcdpp::truncate(w, t); }
};

// Galmarino's test on every grid time: tau(w) <= t iff tau(T_t w) <= t.
template <class Space>
CheckResult<typename Space::point_type> is_stopping_time(
    const Space& s, const BasicStoppingTime<typename Space::point_type>& tau,
    const std::vector<typename Space::point_type>& sample) {
  for (const auto& w : sample) {
    GridTime tw = tau(w);
    for (std::size_t k = 0; k <= s.grid().steps(); ++k) {
      GridTime t(k);
      bool a = tw <= t;
      bool b = tau(s.truncate(w, t)) <= t;
      if (a != b) return CheckResult<typename Space::point_type>::fail(w, t, "Galmarino test fails");
    }
  }
  return {};
}

inline CheckResult<Path> is_stopping_time(const StoppingTime& tau, const std::vector<Path>& sample) {
  if (sample.empty()) return {};
  return is_stopping_time(PathTruncation{sample.front().grid()}, tau, sample);
}

// Z is F_tau-measurable iff Z o T_tau = Z.
template <class Space, class Z>
CheckResult<typename Space::point_type> is_F_tau_measurable(
    const Space& s, const Z& z, const BasicStoppingTime<typename Space::point_type>& tau,
    const std::vector<typename Space::point_type>& sample) {
  for (const auto& w : sample) {
    GridTime t = tau(w);
    if (!(z(s.truncate(w, t)) == z(w)))
      return CheckResult<typename Space::point_type>::fail(w, t, "Z(T_tau w) != Z(w)");
  }
  return {};
}

// F is non-anticipating iff T~_t F(T_t w) = T~_t F(w) for every t.
template <class Space, class F, class TargetTruncate>
CheckResult<typename Space::point_type> is_non_anticipating(const Space& s, const F& f,
                                                            const TargetTruncate& target,
                                                            const std::vector<typename Space::point_type>& sample) {
  for (const auto& w : sample) {
    auto fw = f(w);
    for (std::size_t k = 0; k <= s.grid().steps(); ++k) {
      GridTime t(k);
      if (!(target(f(s.truncate(w, t)), t) == target(fw, t)))
        return CheckResult<typename Space::point_type>::fail(w, t, "output depends on the future");
    }
  }
  return {};
}

template <class F>
CheckResult<Path> is_non_anticipating(const F& f, const std::vector<Path>& sample) {
  if (sample.empty()) return {};
  return is_non_anticipating(
      PathTruncation{sample.front().grid()}, f, [](const Path& p, GridTime t) { return truncate(p, t); }, sample);
}

// Subspace predicates.

inline bool is_continuous(const Path& w) {
  for (const auto& c : w.comps()) {
    if (c.kind == PathKind::ContinuousPL) continue;
    for (std::size_t k = 1; k < w.grid().size(); ++k)
      for (std::size_t i = 0; i < c.dim; ++i)
        if (c.at(k, i) != c.at(0, i)) return false;
  }
  return true;
}

inline bool starts_in(const Path& w, const std::function<bool(const std::vector<double>&)>& start_set) {
  return start_set(w.point(std::size_t{0}));
}

// Once the path enters the closed set it stays constant.
inline bool is_absorbed_in(const Path& w, const std::function<bool(const std::vector<double>&)>& closed_set) {
  for (std::size_t k = 0; k < w.grid().size(); ++k) {
    if (!closed_set(w.point(k))) continue;
    auto x = w.point(k);
    for (std::size_t m = k + 1; m < w.grid().size(); ++m)
      if (w.point(m) != x) return false;
    return true;
  }
  return true;
}

inline bool is_nondecreasing(const Path& w) {
  for (const auto& c : w.comps())
    for (std::size_t k = 1; k < w.grid().size(); ++k)
      for (std::size_t i = 0; i < c.dim; ++i)
        if (c.at(k, i) < c.at(k - 1, i)) return false;
  return true;
}

inline bool is_lipschitz(const Path& w, double L) {
  for (const auto& c : w.comps())
    for (std::size_t k = 1; k < w.grid().size(); ++k)
      for (std::size_t i = 0; i < c.dim; ++i)
        if (std::fabs(c.at(k, i) - c.at(k - 1, i)) > L * w.grid().step()) return false;
  return true;
}

// A subspace is a T-space iff it is closed under every truncation.
template <class Pred>
CheckResult<Path> is_truncation_stable(const Pred& pred, const std::vector<Path>& sample) {
  for (const auto& w : sample) {
    if (!pred(w)) continue;
    for (std::size_t k = 0; k <= w.grid().steps(); ++k)
      if (!pred(truncate(w, GridTime(k))))
        return CheckResult<Path>::fail(w, GridTime(k), "truncation leaves the subspace");
  }
  return {};
}

}  // namespace tcdpp
