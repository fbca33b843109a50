#pragma once

#include <functional>
#include <string>
#include <utility>

#include "tcdpp/pathspace/path.hpp"

namespace tcdpp {

// Stopped path: the value frozen from t on. ControlClass components switch to
// the neutral label on cells starting at or after t.
inline Path truncate(const Path& w, GridTime t) {
  if (t.is_infinite()) return w;
  w.grid().check(t);
  const std::size_t j = t.index();
  const std::size_t n = w.grid().size();
  Path out = w;
  for (std::size_t ci = 0; ci < out.components(); ++ci) {
    Component& c = out.component(ci);
    if (c.kind == PathKind::ControlClass) {
      for (std::size_t k = j; k < n; ++k) c.at(k) = c.neutral;
    } else {
      for (std::size_t k = j + 1; k < n; ++k)
        for (std::size_t i = 0; i < c.dim; ++i) c.at(k, i) = c.at(j, i);
    }
  }
  return out;
}

// Predictable truncation: freezes at the left limit. Only defined for
// cadlag step paths; T'_0 is the constant path at w(0), T'_inf the identity.
inline Path truncate_predictable(const Path& w, GridTime t) {
  for (const auto& c : w.comps())
    if (c.kind != PathKind::CadlagStep) throw UnsupportedKind("predictable truncation needs CadlagStep paths");
  if (t.is_infinite()) return w;
  w.grid().check(t);
  const std::size_t j = t.index() == 0 ? 0 : t.index() - 1;
  Path out = w;
  for (std::size_t ci = 0; ci < out.components(); ++ci) {
    Component& c = out.component(ci);
    for (std::size_t k = j + 1; k < w.grid().size(); ++k)
      for (std::size_t i = 0; i < c.dim; ++i) c.at(k, i) = c.at(j, i);
  }
  return out;
}

template <class W>
class BasicStoppingTime {
 public:
  using Rule = std::function<GridTime(const W&)>;

  BasicStoppingTime() = default;
  BasicStoppingTime(std::string name, Rule rule) : name_(std::move(name)), rule_(std::move(rule)) {}

  GridTime operator()(const W& w) const { return rule_(w); }
  const std::string& name() const { return name_; }

  static BasicStoppingTime constant(GridTime t) {
    return BasicStoppingTime("const:" + t.str(), [t](const W&) { return t; });
  }
  static BasicStoppingTime never() { return constant(GridTime::infinity()); }

 private:
  std::string name_;
  Rule rule_;
};

using StoppingTime = BasicStoppingTime<Path>;

// First grid index at which the point satisfies pred; INFINITY if none.
template <class Pred>
StoppingTime first_hitting(std::string name, Pred pred) {
  return StoppingTime(std::move(name), [pred](const Path& w) {
    for (std::size_t k = 0; k < w.grid().size(); ++k)
      if (pred(w.point(k))) return GridTime(k);
    return GridTime::infinity();
  });
}

inline StoppingTime first_at_level(std::size_t coord, double level) {
  return first_hitting("hit:" + std::to_string(coord) + "=" + std::to_string(level),
                       [coord, level](const std::vector<double>& x) { return x[coord] == level; });
}

template <class Space>
auto truncate_at(const Space& s, const typename Space::point_type& w,
                 const BasicStoppingTime<typename Space::point_type>& tau) {
  return s.truncate(w, tau(w));
}

inline Path truncate_at(const Path& w, const StoppingTime& tau) { return truncate(w, tau(w)); }

}  // namespace tcdpp
