#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "tcdpp/core/errors.hpp"
#include "tcdpp/pathspace/time_grid.hpp"

namespace tcdpp {

enum class PathKind { CadlagStep, ContinuousPL, CaglladStep, ControlClass };

inline const char* kind_name(PathKind k) {
  switch (k) {
    case PathKind::CadlagStep: return "CadlagStep";
    case PathKind::ContinuousPL: return "ContinuousPL";
    case PathKind::CaglladStep: return "CaglladStep";
    case PathKind::ControlClass: return "ControlClass";
  }
  return "?";
}

inline PathKind parse_kind(const std::string& s) {
  for (PathKind k : {PathKind::CadlagStep, PathKind::ContinuousPL, PathKind::CaglladStep, PathKind::ControlClass})
    if (s == kind_name(k)) return k;
  throw UnsupportedKind("unknown path kind '" + s + "'");
}

// One coordinate block of a path. Values are stored row-major, one point of
// R^dim per grid index. For ControlClass the single coordinate is a label
// index and entry k is the label on the cell [t_k, t_{k+1}).
struct Component {
  PathKind kind = PathKind::CadlagStep;
  std::size_t dim = 1;
  std::vector<double> values;
  bool nondecreasing = false;  // CaglladStep only
  std::size_t labels = 0;      // ControlClass only
  double neutral = 0;          // ControlClass only

  double at(std::size_t k, std::size_t i = 0) const { return values[k * dim + i]; }
  double& at(std::size_t k, std::size_t i = 0) { return values[k * dim + i]; }

  friend auto operator<=>(const Component& a, const Component& b) {
    if (auto c = a.kind <=> b.kind; c != 0) return c;
    if (auto c = a.dim <=> b.dim; c != 0) return c;
    return std::lexicographical_compare_three_way(a.values.begin(), a.values.end(), b.values.begin(),
                                                  b.values.end(), [](double x, double y) {
                                                    return x < y ? std::strong_ordering::less
                                                           : y < x ? std::strong_ordering::greater
                                                                   : std::strong_ordering::equal;
                                                  });
  }
  friend bool operator==(const Component& a, const Component& b) {
    return a.kind == b.kind && a.dim == b.dim && a.values == b.values;
  }
};

class Path {
 public:
  Path() = default;

  Path(TimeGrid grid, std::vector<Component> comps) : grid_(grid), comps_(std::move(comps)) { validate(); }

  static Path cadlag(TimeGrid g, std::vector<double> v) { return scalar(g, PathKind::CadlagStep, std::move(v)); }
  static Path continuous(TimeGrid g, std::vector<double> v) { return scalar(g, PathKind::ContinuousPL, std::move(v)); }

  static Path caglad(TimeGrid g, std::vector<double> v, bool nondecreasing = false) {
    Path p = scalar(g, PathKind::CaglladStep, std::move(v), false);
    p.comps_[0].nondecreasing = nondecreasing;
    p.validate();
    return p;
  }

  static Path control(TimeGrid g, const std::vector<int>& labels, std::size_t n_labels, int neutral = 0) {
    Component c;
    c.kind = PathKind::ControlClass;
    c.labels = n_labels;
    c.neutral = neutral;
    c.values.assign(labels.begin(), labels.end());
    return Path(g, {std::move(c)});
  }

  static Path constant(TimeGrid g, PathKind kind, const std::vector<double>& point) {
    Component c;
    c.kind = kind;
    c.dim = point.size();
    for (std::size_t k = 0; k < g.size(); ++k) c.values.insert(c.values.end(), point.begin(), point.end());
    return Path(g, {std::move(c)});
  }

  const TimeGrid& grid() const { return grid_; }
  std::size_t components() const { return comps_.size(); }
  const Component& component(std::size_t i) const { return comps_.at(i); }
  Component& component(std::size_t i) { return comps_.at(i); }
  const std::vector<Component>& comps() const { return comps_; }

  // Total dimension of the value space.
  std::size_t dim() const {
    std::size_t d = 0;
    for (const auto& c : comps_) d += c.dim;
    return d;
  }

  // Coordinate i of the point at grid index k, counting across components.
  double operator()(std::size_t k, std::size_t i = 0) const {
    for (const auto& c : comps_) {
      if (i < c.dim) return c.at(k, i);
      i -= c.dim;
    }
    throw PreconditionError("coordinate out of range");
  }

  std::vector<double> point(std::size_t k) const {
    std::vector<double> x;
    x.reserve(dim());
    for (const auto& c : comps_)
      for (std::size_t i = 0; i < c.dim; ++i) x.push_back(c.at(k, i));
    return x;
  }

  std::vector<double> point(GridTime t) const { return point(t.clamp(grid_.steps())); }

  // Value at a real time s in [0, horizon], following the component's kind.
  double evaluate(double s, std::size_t i = 0) const {
    std::size_t ci = 0;
    while (ci < comps_.size() && i >= comps_[ci].dim) i -= comps_[ci++].dim;
    if (ci == comps_.size()) throw PreconditionError("coordinate out of range");
    const Component& c = comps_[ci];
    double r = std::clamp(s / grid_.step(), 0.0, static_cast<double>(grid_.steps()));
    auto k = static_cast<std::size_t>(std::floor(r));
    bool on_node = static_cast<double>(k) == r;
    switch (c.kind) {
      case PathKind::CadlagStep:
      case PathKind::ControlClass:
        return c.at(k, i);
      case PathKind::CaglladStep:
        return on_node ? c.at(k, i) : c.at(k + 1, i);
      case PathKind::ContinuousPL: {
        if (on_node) return c.at(k, i);
        double w = r - static_cast<double>(k);
        return (1 - w) * c.at(k, i) + w * c.at(k + 1, i);
      }
    }
    return 0;
  }

  friend bool operator==(const Path& a, const Path& b) { return a.grid_ == b.grid_ && a.comps_ == b.comps_; }
  friend auto operator<=>(const Path& a, const Path& b) {
    return std::lexicographical_compare_three_way(a.comps_.begin(), a.comps_.end(), b.comps_.begin(),
                                                  b.comps_.end());
  }

 private:
  static Path scalar(TimeGrid g, PathKind kind, std::vector<double> v, bool check = true) {
    Component c;
    c.kind = kind;
    c.values = std::move(v);
    Path p;
    p.grid_ = g;
    p.comps_.push_back(std::move(c));
    if (check) p.validate();
    return p;
  }

  void validate() const {
    if (comps_.empty()) throw PreconditionError("path without components");
    for (const auto& c : comps_) {
      if (c.dim == 0) throw PreconditionError("component of dimension 0");
      if (c.values.size() != grid_.size() * c.dim)
        throw GridMismatch("component has " + std::to_string(c.values.size()) + " values, grid needs " +
                           std::to_string(grid_.size() * c.dim));
      if (c.kind == PathKind::ControlClass) {
        if (c.dim != 1) throw UnsupportedKind("ControlClass components carry one label");
        for (double x : c.values)
          if (x < 0 || x != std::floor(x) || (c.labels && x >= static_cast<double>(c.labels)))
            throw PreconditionError("invalid control label");
      }
      if (c.nondecreasing) {
        if (c.kind != PathKind::CaglladStep) throw UnsupportedKind("nondecreasing flag needs CaglladStep");
        for (std::size_t k = 1; k < grid_.size(); ++k)
          for (std::size_t i = 0; i < c.dim; ++i)
            if (c.at(k, i) < c.at(k - 1, i)) throw PreconditionError("path flagged nondecreasing decreases");
      }
    }
  }

  TimeGrid grid_;
  std::vector<Component> comps_;
};

// Product of two paths on the same grid; components are concatenated in order.
inline Path product(const Path& a, const Path& b) {
  require_same_grid(a.grid(), b.grid());
  std::vector<Component> c = a.comps();
  c.insert(c.end(), b.comps().begin(), b.comps().end());
  return Path(a.grid(), std::move(c));
}

// Projection onto one component.
inline Path project(const Path& p, std::size_t comp) { return Path(p.grid(), {p.component(comp)}); }

}  // namespace tcdpp
