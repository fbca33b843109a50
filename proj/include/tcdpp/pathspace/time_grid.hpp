#pragma once

#include <cmath>
#include <compare>
#include <cstddef>
#include <limits>
#include <string>

#include "tcdpp/core/errors.hpp"

namespace tcdpp {

// A grid index or the sentinel INFINITY ("never").
class GridTime {
 public:
  constexpr GridTime() = default;
  constexpr explicit GridTime(std::size_t k) : k_(k) {
    if (k == kInf) throw GridMismatch("grid index overflow");
  }

  static constexpr GridTime infinity() {
    GridTime t;
    t.k_ = kInf;
    return t;
  }

  constexpr bool is_infinite() const { return k_ == kInf; }
  constexpr bool finite() const { return k_ != kInf; }

  std::size_t index() const {
    if (is_infinite()) throw PreconditionError("index() of INFINITY");
    return k_;
  }

  // Index with INFINITY mapped to the last grid point; for evaluating paths
  // that are constant past the horizon.
  std::size_t clamp(std::size_t last) const { return k_ < last ? k_ : last; }

  friend constexpr auto operator<=>(GridTime a, GridTime b) = default;

  std::string str() const { return is_infinite() ? std::string("inf") : std::to_string(k_); }

 private:
  static constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();
  std::size_t k_ = 0;
};

inline GridTime min(GridTime a, GridTime b) { return a < b ? a : b; }
inline GridTime max(GridTime a, GridTime b) { return a < b ? b : a; }

// Uniform grid t_k = k * step, k = 0..steps.
class TimeGrid {
 public:
  TimeGrid() = default;
  TimeGrid(double step, std::size_t steps) : step_(step), steps_(steps) {
    if (!(step > 0) || !std::isfinite(step)) throw PreconditionError("grid step must be positive");
  }

  double step() const { return step_; }
  std::size_t steps() const { return steps_; }
  std::size_t size() const { return steps_ + 1; }
  double horizon() const { return step_ * static_cast<double>(steps_); }
  double time(std::size_t k) const { return step_ * static_cast<double>(k); }

  GridTime last() const { return GridTime(steps_); }

  // Off-grid times are rejected, never rounded.
  GridTime at(double t) const {
    if (std::isinf(t) && t > 0) return GridTime::infinity();
    if (!std::isfinite(t) || t < 0) throw GridMismatch("time " + std::to_string(t) + " is not a grid time");
    double r = t / step_;
    double k = std::round(r);
    if (std::fabs(r - k) > 1e-9 * std::max(1.0, std::fabs(r)))
      throw GridMismatch("time " + std::to_string(t) + " is off the grid of step " + std::to_string(step_));
    if (k > static_cast<double>(steps_)) throw GridMismatch("time " + std::to_string(t) + " is past the horizon");
    return GridTime(static_cast<std::size_t>(k));
  }

  void check(GridTime t) const {
    if (t.finite() && t.index() > steps_)
      throw GridMismatch("grid index " + t.str() + " is past the horizon");
  }

  friend bool operator==(const TimeGrid& a, const TimeGrid& b) {
    return a.step_ == b.step_ && a.steps_ == b.steps_;
  }

 private:
  double step_ = 1.0;
  std::size_t steps_ = 0;
};

inline void require_same_grid(const TimeGrid& a, const TimeGrid& b) {
  if (!(a == b)) throw GridMismatch("objects live on different time grids");
}

}  // namespace tcdpp
