#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "tcdpp/concat/concatenation.hpp"
#include "tcdpp/core/summation.hpp"
#include "tcdpp/measures/finite_measure.hpp"
#include "tcdpp/pathspace/serialize.hpp"

namespace tcdpp {

template <class S, class W, class F>
auto pushforward(const FiniteMeasure<S, W>& mu, const F& f) {
  using W2 = std::decay_t<decltype(f(std::declval<const W&>()))>;
  std::vector<std::pair<W2, S>> atoms;
  atoms.reserve(mu.size());
  for (const auto& [w, m] : mu.atoms()) atoms.emplace_back(f(w), m);
  return FiniteMeasure<S, W2>(std::move(atoms));
}

// mu_{<=tau}: pushforward under T_tau.
template <TcSpace Sp, class S>
FiniteMeasure<S, typename Sp::point_type> truncate_measure(
    const Sp& sp, const FiniteMeasure<S, typename Sp::point_type>& mu,
    const BasicStoppingTime<typename Sp::point_type>& tau) {
  return pushforward(mu, [&](const auto& w) { return sp.truncate(w, tau(w)); });
}

// nu^{<=tau}(w) = nu(T_tau w).
template <TcSpace Sp, class S>
Kernel<S, typename Sp::point_type> restrict_kernel(const Sp& sp, Kernel<S, typename Sp::point_type> nu,
                                                   BasicStoppingTime<typename Sp::point_type> tau) {
  return [sp, nu = std::move(nu), tau = std::move(tau)](const typename Sp::point_type& w) {
    return nu(sp.truncate(w, tau(w)));
  };
}

// nu_{<=tau}(w) = nu(w) pushed forward under T_tau.
template <TcSpace Sp, class S>
Kernel<S, typename Sp::point_type> truncate_kernel(const Sp& sp, Kernel<S, typename Sp::point_type> nu,
                                                   BasicStoppingTime<typename Sp::point_type> tau) {
  return [sp, nu = std::move(nu), tau = std::move(tau)](const typename Sp::point_type& w) {
    return truncate_measure(sp, nu(w), tau);
  };
}

template <class W>
struct CompatibilityReport {
  bool ok = true;
  std::optional<W> w;
  std::optional<W> w2;
  explicit operator bool() const { return ok; }
};

template <TcSpace Sp, class S>
CompatibilityReport<typename Sp::point_type> compatible(const Sp& sp,
                                                        const FiniteMeasure<S, typename Sp::point_type>& mu,
                                                        const BasicStoppingTime<typename Sp::point_type>& tau,
                                                        const Kernel<S, typename Sp::point_type>& nu) {
  for (const auto& [w, m] : mu.atoms()) {
    GridTime t = tau(w);
    if (t.is_infinite()) continue;
    auto wt = sp.truncate(w, t);
    for (auto law = nu(wt); const auto& [w2, m2] : law.atoms())
      if (!sp.compatible(w, t, w2)) return {false, w, w2};
  }
  return {};
}

// mu *_tau nu: law of w *_tau(w) w2 where w ~ mu and w2 ~ nu(T_tau w).
template <TcSpace Sp, class S>
FiniteMeasure<S, typename Sp::point_type> concat_measure(const Sp& sp,
                                                         const FiniteMeasure<S, typename Sp::point_type>& mu,
                                                         const BasicStoppingTime<typename Sp::point_type>& tau,
                                                         const Kernel<S, typename Sp::point_type>& nu) {
  using W = typename Sp::point_type;
  std::vector<std::pair<W, S>> atoms;
  for (const auto& [w, m] : mu.atoms()) {
    GridTime t = tau(w);
    if (t.is_infinite()) {
      atoms.emplace_back(w, m);
      continue;
    }
    auto wt = sp.truncate(w, t);
    for (auto law = nu(wt); const auto& [w2, m2] : law.atoms()) {
      if (!sp.compatible(w, t, w2)) {
        std::string msg = "concat_measure: support pair incompatible at index " + t.str();
        if constexpr (std::is_same_v<W, Path>) msg += "\n" + to_csv(w) + to_csv(w2);
        throw Incompatible(msg);
      }
      atoms.emplace_back(sp.concat(w, t, w2), m * m2);
    }
  }
  return FiniteMeasure<S, W>(std::move(atoms));
}

template <class S, class W, class G>
S integrate(const FiniteMeasure<S, W>& mu, const G& g) {
  S acc(0);
  for (const auto& [w, m] : mu.atoms()) acc += m * S(g(w));
  return acc;
}

// Integral of an extended-real integrand.
template <class S, class W, class G>
Extended<S> integrate_extended(const FiniteMeasure<S, W>& mu, const G& g) {
  Extended<S> acc(S(0));
  for (const auto& [w, m] : mu.atoms()) acc = acc + scale(m, Extended<S>(g(w)));
  return acc;
}

template <class W, class G>
MeanEstimate integrate(const EmpiricalMeasure<W>& mu, const G& g) {
  std::vector<double> x;
  x.reserve(mu.size());
  for (const auto& w : mu.samples()) x.push_back(static_cast<double>(g(w)));
  return mean_estimate(x);
}

// Exact conditional law of theta_tau given w_{<=tau}, by grouping support
// atoms on their truncations. Cells of zero mu-probability fall back to
// `fallback` (default: point mass at the truncated path seen from tau).
template <TcSpace Sp, class S>
Kernel<S, typename Sp::point_type> conditional_kernel(const Sp& sp,
                                                      const FiniteMeasure<S, typename Sp::point_type>& mu,
                                                      const BasicStoppingTime<typename Sp::point_type>& tau,
                                                      Kernel<S, typename Sp::point_type> fallback = {}) {
  using W = typename Sp::point_type;
  std::map<W, std::vector<std::pair<W, S>>> cells;
  std::map<W, S> cell_mass;
  for (const auto& [w, m] : mu.atoms()) {
    GridTime t = tau(w);
    if (t.is_infinite()) continue;
    W key = sp.truncate(w, t);
    cells[key].emplace_back(sp.shift(t, w), m);
    cell_mass[key] += m;
  }
  std::map<W, FiniteMeasure<S, W>> laws;
  for (auto& [key, atoms] : cells) {
    S total = cell_mass[key];
    for (auto& a : atoms) a.second /= total;
    laws.emplace(key, FiniteMeasure<S, W>(std::move(atoms)));
  }
  if (!fallback)
    fallback = [sp, tau](const W& w) {
      GridTime t = tau(w);
      return FiniteMeasure<S, W>::dirac(sp.shift(t.is_infinite() ? GridTime(0) : t, sp.truncate(w, t)));
    };
  return [sp, tau, laws = std::move(laws), fallback = std::move(fallback)](const W& w) {
    auto it = laws.find(sp.truncate(w, tau(w)));
    return it != laws.end() ? it->second : fallback(w);
  };
}

// Measure CSV: "mass,path_id" rows followed by the path table.
template <class S>
void write_measure_csv(std::ostream& os, const FiniteMeasure<S, Path>& mu) {
  os << "# measure atoms=" << mu.size() << " mode=" << (ScalarTraits<S>::exact ? "rational" : "double") << '\n';
  os << "mass,path_id\n";
  for (std::size_t i = 0; i < mu.size(); ++i) os << format_scalar(mu.atoms()[i].second) << ',' << i << '\n';
  for (std::size_t i = 0; i < mu.size(); ++i) {
    os << "# path_id=" << i << '\n';
    write_path_csv(os, mu.atoms()[i].first);
  }
}

template <class S>
FiniteMeasure<S, Path> read_measure_csv(std::istream& is) {
  std::string line;
  std::getline(is, line);
  if (line.rfind("# measure", 0) != 0) throw Error("missing measure header");
  std::size_t n = std::stoul(detail::header_value(line, "atoms"));
  std::getline(is, line);
  std::vector<S> masses;
  for (std::size_t i = 0; i < n; ++i) {
    std::getline(is, line);
    masses.push_back(parse_scalar<S>(detail::split(line, ',').at(0)));
  }
  std::vector<std::pair<Path, S>> atoms;
  for (std::size_t i = 0; i < n; ++i) {
    std::getline(is, line);
    atoms.emplace_back(read_path_csv(is), masses[i]);
  }
  return FiniteMeasure<S, Path>(std::move(atoms));
}

}  // namespace tcdpp
