#pragma once

#include <vector>

#include "tcdpp/core/random.hpp"
#include "tcdpp/pathspace/path.hpp"

namespace tcdpp {

// Random path with small integer values, so every algebraic law can be
// checked with exact floating-point equality.
inline Path random_path(Stream& rng, const TimeGrid& g, PathKind kind, std::size_t dim = 1, int range = 4,
                        std::size_t labels = 3) {
  Component c;
  c.kind = kind;
  if (kind == PathKind::ControlClass) {
    c.dim = 1;
    c.labels = labels;
    c.neutral = 0;
    for (std::size_t k = 0; k < g.size(); ++k)
      c.values.push_back(static_cast<double>(rng.uniform_int(0, static_cast<std::int64_t>(labels) - 1)));
    return Path(g, {std::move(c)});
  }
  c.dim = dim;
  bool monotone = kind == PathKind::CaglladStep && rng.bernoulli(0.5);
  c.nondecreasing = monotone;
  for (std::size_t k = 0; k < g.size(); ++k)
    for (std::size_t i = 0; i < dim; ++i) {
      double v;
      if (monotone) v = (k == 0 ? 0 : c.at(k - 1, i)) + static_cast<double>(rng.uniform_int(0, 2));
      else v = static_cast<double>(rng.uniform_int(-range, range));
      c.values.push_back(v);
    }
  return Path(g, {std::move(c)});
}

// Same kind and shape as w but started at `start` (for strict compatibility).
inline Path random_path_from(Stream& rng, const Path& like, const std::vector<double>& start, int range = 4) {
  Path p = like;
  for (std::size_t ci = 0; ci < p.components(); ++ci) {
    Component& c = p.component(ci);
    if (c.kind == PathKind::ControlClass) {
      for (auto& v : c.values) v = static_cast<double>(rng.uniform_int(0, static_cast<std::int64_t>(c.labels) - 1));
      continue;
    }
    for (std::size_t k = 0; k < p.grid().size(); ++k)
      for (std::size_t i = 0; i < c.dim; ++i)
        c.at(k, i) = c.nondecreasing ? (k == 0 ? 0 : c.at(k - 1, i)) + static_cast<double>(rng.uniform_int(0, 2))
                                     : static_cast<double>(rng.uniform_int(-range, range));
  }
  // shift values so that the point at 0 equals start
  std::size_t off = 0;
  for (std::size_t ci = 0; ci < p.components(); ++ci) {
    Component& c = p.component(ci);
    for (std::size_t i = 0; i < c.dim; ++i, ++off) {
      if (c.kind == PathKind::ControlClass) {
        c.at(0, i) = start[off];
        continue;
      }
      double d = start[off] - c.at(0, i);
      for (std::size_t k = 0; k < p.grid().size(); ++k) c.at(k, i) += d;
    }
  }
  return Path(p.grid(), p.comps());
}

}  // namespace tcdpp
