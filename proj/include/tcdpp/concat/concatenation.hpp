#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "tcdpp/pathspace/truncation.hpp"

namespace tcdpp {

enum class ConcatRule {
  Strict,         // w(s) for s <= t, w'(s - t) after; needs w(t) = w'(0)
  Adjusted,       // w(t) + w'(s - t) - w'(0) after t; always compatible
  ControlSplice,  // labels of w before t, labels of w' shifted after
};

inline const char* rule_name(ConcatRule r) {
  switch (r) {
    case ConcatRule::Strict: return "strict";
    case ConcatRule::Adjusted: return "adjusted";
    case ConcatRule::ControlSplice: return "splice";
  }
  return "?";
}

// Per-component concatenation rules. A single rule applies to every component.
class Concatenation {
 public:
  Concatenation() : rules_{ConcatRule::Strict} {}
  explicit Concatenation(std::vector<ConcatRule> rules, double tolerance = 0)
      : rules_(std::move(rules)), tol_(tolerance) {
    if (rules_.empty()) throw PreconditionError("concatenation needs at least one rule");
    if (tol_ < 0) throw PreconditionError("negative compatibility tolerance");
  }
  Concatenation(ConcatRule r) : rules_{r} {}  // NOLINT implicit

  ConcatRule rule(std::size_t comp) const { return rules_.size() == 1 ? rules_[0] : rules_.at(comp); }
  double tolerance() const { return tol_; }

  void check(const Path& w) const {
    if (rules_.size() != 1 && rules_.size() != w.components())
      throw PreconditionError("concatenation has " + std::to_string(rules_.size()) + " rules for " +
                              std::to_string(w.components()) + " components");
    for (std::size_t ci = 0; ci < w.components(); ++ci) {
      bool control = w.component(ci).kind == PathKind::ControlClass;
      bool splice = rule(ci) == ConcatRule::ControlSplice;
      if (control != splice)
        throw UnsupportedKind(std::string(rule_name(rule(ci))) + " concatenation on a " +
                              kind_name(w.component(ci).kind) + " component");
    }
  }

  bool compatible(const Path& w, GridTime t, const Path& w2) const {
    if (t.is_infinite()) return true;
    require_same_grid(w.grid(), w2.grid());
    w.grid().check(t);
    check(w);
    check(w2);
    const std::size_t j = t.index();
    for (std::size_t ci = 0; ci < w.components(); ++ci) {
      if (rule(ci) != ConcatRule::Strict) continue;
      const Component& a = w.component(ci);
      const Component& b = w2.component(ci);
      if (a.dim != b.dim) return false;
      for (std::size_t i = 0; i < a.dim; ++i) {
        double d = a.at(j, i) - b.at(0, i);
        if (tol_ == 0 ? a.at(j, i) != b.at(0, i) : std::fabs(d) > tol_) return false;
      }
    }
    return true;
  }

  // Output is clipped at the common horizon.
  Path concat(const Path& w, GridTime t, const Path& w2) const {
    if (t.is_infinite()) return w;
    if (!compatible(w, t, w2))
      throw Incompatible("paths are not compatible for concatenation at index " + t.str());
    const std::size_t j = t.index();
    const std::size_t n = w.grid().size();
    Path out = w;
    for (std::size_t ci = 0; ci < w.components(); ++ci) {
      Component& c = out.component(ci);
      const Component& b = w2.component(ci);
      switch (rule(ci)) {
        case ConcatRule::Strict:
          for (std::size_t k = j + 1; k < n; ++k)
            for (std::size_t i = 0; i < c.dim; ++i) c.at(k, i) = b.at(k - j, i);
          break;
        case ConcatRule::Adjusted: {
          std::vector<double> base(c.dim);
          for (std::size_t i = 0; i < c.dim; ++i) base[i] = c.at(j, i);
          for (std::size_t k = j + 1; k < n; ++k)
            for (std::size_t i = 0; i < c.dim; ++i) c.at(k, i) = base[i] + (b.at(k - j, i) - b.at(0, i));
          break;
        }
        case ConcatRule::ControlSplice:
          for (std::size_t k = j; k < n; ++k) c.at(k) = b.at(k - j);
          break;
      }
    }
    return out;
  }

  // theta_t: the path seen from time t. Strict components are clipped at the
  // horizon, adjusted ones restart at 0, control labels are padded with the
  // neutral label.
  Path shift(GridTime t, const Path& w) const {
    if (t.is_infinite()) return w;
    w.grid().check(t);
    check(w);
    const std::size_t j = t.index();
    const std::size_t n = w.grid().size();
    Path out = w;
    for (std::size_t ci = 0; ci < w.components(); ++ci) {
      Component& c = out.component(ci);
      const Component& a = w.component(ci);
      for (std::size_t k = 0; k < n; ++k) {
        std::size_t src = std::min(k + j, n - 1);
        switch (rule(ci)) {
          case ConcatRule::Strict:
            for (std::size_t i = 0; i < c.dim; ++i) c.at(k, i) = a.at(src, i);
            break;
          case ConcatRule::Adjusted:
            for (std::size_t i = 0; i < c.dim; ++i) c.at(k, i) = a.at(src, i) - a.at(j, i);
            break;
          case ConcatRule::ControlSplice:
            c.at(k) = k + j < n ? a.at(k + j) : a.neutral;
            break;
        }
      }
    }
    return out;
  }

 private:
  std::vector<ConcatRule> rules_;
  double tol_ = 0;
};

// Paths on a fixed grid with standard truncation and a concatenation.
class PathSpace {
 public:
  using point_type = Path;

  PathSpace(TimeGrid grid, Concatenation c) : grid_(grid), c_(std::move(c)) {}

  const TimeGrid& grid() const { return grid_; }
  const Concatenation& concatenation() const { return c_; }

  Path truncate(const Path& w, GridTime t) const { return tcdpp::truncate(w, t); }
  bool compatible(const Path& w, GridTime t, const Path& w2) const { return c_.compatible(w, t, w2); }
  Path concat(const Path& w, GridTime t, const Path& w2) const { return c_.concat(w, t, w2); }
  Path shift(GridTime t, const Path& w) const { return c_.shift(t, w); }

 private:
  TimeGrid grid_;
  Concatenation c_;
};

template <class S>
concept TcSpace = requires(const S& s, const typename S::point_type& w, GridTime t) {
  { s.grid() } -> std::convertible_to<const TimeGrid&>;
  { s.truncate(w, t) } -> std::convertible_to<typename S::point_type>;
  { s.compatible(w, t, w) } -> std::convertible_to<bool>;
  { s.concat(w, t, w) } -> std::convertible_to<typename S::point_type>;
  { s.shift(t, w) } -> std::convertible_to<typename S::point_type>;
};

inline Path concat(const Path& w, GridTime t, const Path& w2, const Concatenation& c) { return c.concat(w, t, w2); }
inline bool compatible(const Path& w, GridTime t, const Path& w2, const Concatenation& c) {
  return c.compatible(w, t, w2);
}
inline Path shift(GridTime t, const Path& w, const Concatenation& c) { return c.shift(t, w); }

template <TcSpace S>
typename S::point_type concat_at(const S& s, const typename S::point_type& w,
                                 const BasicStoppingTime<typename S::point_type>& tau,
                                 const typename S::point_type& w2) {
  return s.concat(w, tau(w), w2);
}

}  // namespace tcdpp
