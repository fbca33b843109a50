#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "tcdpp/pathspace/time_grid.hpp"

namespace tcdpp {

// Finite atomic measure on grid x R^d; atoms are (time index, point) -> mass.
class SpaceTimeMeasure {
 public:
  using Key = std::pair<std::size_t, std::vector<double>>;

  SpaceTimeMeasure() = default;
  explicit SpaceTimeMeasure(TimeGrid g) : grid_(g) {}

  void add(std::size_t time, std::vector<double> point, double mass) {
    grid_.check(GridTime(time));
    if (mass < 0) throw PreconditionError("negative atom mass");
    if (mass == 0) return;
    atoms_[{time, std::move(point)}] += mass;
  }

  const TimeGrid& grid() const { return grid_; }
  const std::map<Key, double>& atoms() const { return atoms_; }

  double mass_before(std::size_t t) const {
    double m = 0;
    for (const auto& [k, v] : atoms_)
      if (k.first < t) m += v;
    return m;
  }

  double total() const {
    double m = 0;
    for (const auto& [k, v] : atoms_) m += v;
    return m;
  }

  friend bool operator==(const SpaceTimeMeasure& a, const SpaceTimeMeasure& b) {
    return a.grid_ == b.grid_ && a.atoms_ == b.atoms_;
  }
  friend bool operator<(const SpaceTimeMeasure& a, const SpaceTimeMeasure& b) { return a.atoms_ < b.atoms_; }

 private:
  TimeGrid grid_;
  std::map<Key, double> atoms_;
};

inline bool approx_equal(const SpaceTimeMeasure& a, const SpaceTimeMeasure& b, double tol) {
  if (a.atoms().size() != b.atoms().size()) return false;
  auto ib = b.atoms().begin();
  for (const auto& [k, v] : a.atoms()) {
    if (k != ib->first || std::fabs(v - ib->second) > tol) return false;
    ++ib;
  }
  return true;
}

// Keeps atoms with time <= t.
inline SpaceTimeMeasure truncate(const SpaceTimeMeasure& m, GridTime t) {
  if (t.is_infinite()) return m;
  m.grid().check(t);
  SpaceTimeMeasure out(m.grid());
  for (const auto& [k, v] : m.atoms())
    if (k.first <= t.index()) out.add(k.first, k.second, v);
  return out;
}

// Splices m on [0, t) with m2 moved to [t, horizon]; atoms pushed past the
// horizon are dropped. With renormalize, m2 is scaled by 1 - m([0, t)).
inline SpaceTimeMeasure splice(const SpaceTimeMeasure& m, GridTime t, const SpaceTimeMeasure& m2, bool renormalize) {
  if (t.is_infinite()) return m;
  require_same_grid(m.grid(), m2.grid());
  m.grid().check(t);
  const std::size_t j = t.index();
  SpaceTimeMeasure out(m.grid());
  for (const auto& [k, v] : m.atoms())
    if (k.first < j) out.add(k.first, k.second, v);
  double scale = renormalize ? 1 - m.mass_before(j) : 1;
  for (const auto& [k, v] : m2.atoms())
    if (k.first + j <= m.grid().steps()) out.add(k.first + j, k.second, scale * v);
  return out;
}

// Restriction to [t, horizon] moved back to start at 0, rescaled by the
// remaining mass in the renormalized variant.
inline SpaceTimeMeasure shift(GridTime t, const SpaceTimeMeasure& m, bool renormalize) {
  if (t.is_infinite()) return m;
  m.grid().check(t);
  const std::size_t j = t.index();
  SpaceTimeMeasure out(m.grid());
  double rest = 1 - m.mass_before(j);
  double scale = renormalize ? (rest > 0 ? 1 / rest : 0) : 1;
  for (const auto& [k, v] : m.atoms())
    if (k.first >= j) out.add(k.first - j, k.second, scale * v);
  return out;
}

// The measure-valued path space with either splice.
class MeasureSpace {
 public:
  using point_type = SpaceTimeMeasure;

  MeasureSpace(TimeGrid grid, bool renormalize) : grid_(grid), renorm_(renormalize) {}

  const TimeGrid& grid() const { return grid_; }
  SpaceTimeMeasure truncate(const SpaceTimeMeasure& m, GridTime t) const { return tcdpp::truncate(m, t); }
  bool compatible(const SpaceTimeMeasure&, GridTime, const SpaceTimeMeasure&) const { return true; }
  SpaceTimeMeasure concat(const SpaceTimeMeasure& m, GridTime t, const SpaceTimeMeasure& m2) const {
    return splice(m, t, m2, renorm_);
  }
  SpaceTimeMeasure shift(GridTime t, const SpaceTimeMeasure& m) const { return tcdpp::shift(t, m, renorm_); }

 private:
  TimeGrid grid_;
  bool renorm_;
};

}  // namespace tcdpp
