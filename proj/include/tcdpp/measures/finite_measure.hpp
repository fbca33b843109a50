#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "tcdpp/core/random.hpp"
#include "tcdpp/core/scalar.hpp"
#include "tcdpp/core/summation.hpp"
#include "tcdpp/pathspace/path.hpp"

namespace tcdpp {

// Finitely supported probability measure. Atoms are kept sorted by point with
// duplicates merged, so equal measures have equal atom lists.
template <class S, class W = Path>
class FiniteMeasure {
 public:
  using scalar_type = S;
  using point_type = W;
  using Atom = std::pair<W, S>;

  FiniteMeasure() = default;

  explicit FiniteMeasure(std::vector<Atom> atoms, bool normalized = true) : atoms_(std::move(atoms)) {
    canonicalize();
    if (normalized) check_normalized();
  }

  static FiniteMeasure dirac(W w) { return FiniteMeasure({{std::move(w), S(1)}}); }

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }

  S total() const {
    S t(0);
    for (const auto& a : atoms_) t += a.second;
    return t;
  }

  void check_normalized() const {
    S t = total();
    if constexpr (ScalarTraits<S>::exact) {
      if (t != S(1)) throw InvariantError("measure masses sum to " + format_scalar(t) + ", not 1");
    } else {
      if (std::fabs(t - 1.0) > 1e-12) throw InvariantError("measure masses sum to " + format_scalar(t) + ", not 1");
    }
  }

  S mass_of(const W& w) const {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), w, [](const Atom& a, const W& x) { return a.first < x; });
    return it != atoms_.end() && it->first == w ? it->second : S(0);
  }

  friend bool operator==(const FiniteMeasure& a, const FiniteMeasure& b) { return a.atoms_ == b.atoms_; }
  friend bool operator<(const FiniteMeasure& a, const FiniteMeasure& b) {
    return std::lexicographical_compare(a.atoms_.begin(), a.atoms_.end(), b.atoms_.begin(), b.atoms_.end(),
                                        [](const Atom& x, const Atom& y) {
                                          if (x.first < y.first) return true;
                                          if (y.first < x.first) return false;
                                          return x.second < y.second;
                                        });
  }

 private:
  void canonicalize() {
    for (const auto& a : atoms_)
      if (a.second < 0) throw InvariantError("negative atom mass");
    std::sort(atoms_.begin(), atoms_.end(), [](const Atom& a, const Atom& b) { return a.first < b.first; });
    std::vector<Atom> merged;
    merged.reserve(atoms_.size());
    for (auto& a : atoms_) {
      if (!merged.empty() && merged.back().first == a.first) merged.back().second += a.second;
      else merged.push_back(std::move(a));
    }
    std::erase_if(merged, [](const Atom& a) { return a.second == 0; });
    atoms_ = std::move(merged);
  }

  std::vector<Atom> atoms_;
};

// Bag of Monte-Carlo samples with the seed that produced them.
template <class W = Path>
class EmpiricalMeasure {
 public:
  EmpiricalMeasure(std::vector<W> samples, std::uint64_t seed) : samples_(std::move(samples)), seed_(seed) {
    if (samples_.empty()) throw InvariantError("empirical measure without samples");
  }
  const std::vector<W>& samples() const { return samples_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t size() const { return samples_.size(); }

 private:
  std::vector<W> samples_;
  std::uint64_t seed_;
};

template <class S, class W = Path>
using Kernel = std::function<FiniteMeasure<S, W>(const W&)>;

}  // namespace tcdpp
