#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "tcdpp/cli/report.hpp"
#include "tcdpp/concat/laws.hpp"
#include "tcdpp/dpp/engine.hpp"
#include "tcdpp/dpp/tree.hpp"
#include "tcdpp/martingale/generated.hpp"
#include "tcdpp/pathspace/random_paths.hpp"

// Exact verification suites over seeded random instances.
namespace tcdpp::cli {

namespace detail {

using R = Rational;

inline void add_laws(Outcome& out, const std::string& suite, const std::vector<LawResult>& laws,
                     std::size_t min_instances) {
  for (const auto& l : laws) {
    out.table.add({suite, l.law, l.kind, std::to_string(l.instances), std::to_string(l.failures)});
    if (!l.ok()) out.fail(suite + "/" + l.law + "/" + l.kind + ": " + l.first_failure);
    else if (l.instances < min_instances)
      out.fail(suite + "/" + l.law + "/" + l.kind + ": only " + std::to_string(l.instances) + " instances");
  }
}

inline FiniteMeasure<R> random_measure(Stream& rng, std::size_t n, const TimeGrid& g) {
  std::vector<std::pair<Path, R>> atoms;
  long long tot = 0;
  std::vector<long long> w;
  for (std::size_t i = 0; i < n; ++i) tot += w.emplace_back(rng.uniform_int(1, 5));
  for (std::size_t i = 0; i < n; ++i) atoms.emplace_back(random_path(rng, g, PathKind::CadlagStep, 1, 1), R(w[i], tot));
  return FiniteMeasure<R>(std::move(atoms));
}

// Depends on its argument only through a hash, so it is a kernel.
inline Kernel<R> random_kernel(std::uint64_t seed) {
  return [seed](const Path& w) {
    Stream rng(seed, tcdpp::detail::path_hash(w));
    return random_measure(rng, 1 + rng.uniform_int(0, 2), w.grid());
  };
}

// Decides at k from the path truncated at k only.
inline StoppingTime random_tau(std::uint64_t seed) {
  return StoppingTime("rand:" + std::to_string(seed), [seed](const Path& w) {
    for (std::size_t k = 0; k < w.grid().size(); ++k) {
      Stream rng(seed, tcdpp::detail::path_hash(truncate(w, GridTime(k))));
      if (rng.uniform_int(0, 2) == 0) return GridTime(k);
    }
    return GridTime::infinity();
  });
}

inline R weighted_sum(const Path& w) {
  R s(0);
  for (std::size_t k = 0; k < w.grid().size(); ++k)
    s += R(static_cast<long long>(w(k))) * R(static_cast<long long>(k + 1));
  return s;
}

}  // namespace detail

// Truncation/concatenation laws over all path kinds and the measure-level laws.
inline Outcome verify_core(std::uint64_t seed, std::size_t instances = 1000) {
  Outcome out{"verify-core", {{"suite", "law", "kind", "instances", "failures"}, {}}, {}, {}};
  // Some laws only apply to part of the draws (e.g. compatible pairs), so
  // draw more until every law has seen the requested number of instances.
  auto enough = [&](auto run) {
    std::size_t n = instances;
    for (;;) {
      auto laws = run(seed, n);
      std::size_t least = instances;
      for (const auto& l : laws) least = std::min(least, l.instances);
      if (least >= instances || n >= 16 * instances) return laws;
      n = n * instances / std::max<std::size_t>(least, 1) + n / 10;
    }
  };
  detail::add_laws(out, "path", enough(run_path_laws), instances);
  detail::add_laws(out, "measure", enough(run_measure_laws), instances);
  out.note("laws", std::to_string(out.table.rows.size()));
  return out;
}

// Integral and disintegration identities on random finite measures, exact in
// rational arithmetic:
//   int G d(mu *_tau nu) = sum over the truncated measure and restricted kernel,
//   int G d(mu *_tau nu) = int [G 1{tau = inf} + int G dnu(w_{<=tau}) 1{tau < inf}] dmu for tail G,
//   mu = mu *_tau (conditional kernel of mu given T_tau).
inline Outcome measure_algebra(std::uint64_t seed, std::size_t instances = 200) {
  using detail::R;
  Outcome out{"measure-algebra", {{"law", "instances", "failures"}, {}}, {}, {}};
  const TimeGrid g3(1.0, 3);

  std::size_t bad = 0;
  {
    PathSpace sp(g3, ConcatRule::Adjusted);
    Stream rng(seed, 0x6361);
    for (std::size_t rep = 0; rep < instances; ++rep) {
      auto mu = detail::random_measure(rng, 1 + rng.uniform_int(0, 4), g3);
      auto tau = detail::random_tau(seed * 7919 + 3 * rep);
      auto nu = detail::random_kernel(seed * 7919 + 3 * rep + 1);
      auto cat = concat_measure(sp, mu, tau, nu);
      R direct = integrate(cat, detail::weighted_sum);
      R iter(0);
      for (auto head = truncate_measure(sp, mu, tau); const auto& [a, m] : head.atoms()) {
        GridTime t = tau(a);
        if (t.is_infinite()) {
          iter += m * detail::weighted_sum(a);
          continue;
        }
        for (auto law = restrict_kernel(sp, nu, tau)(a); const auto& [b, m2] : law.atoms())
          iter += m * m2 * detail::weighted_sum(sp.concat(a, t, b));
      }
      if (cat.total() != R(1) || direct != iter) {
        if (!bad++) out.fail("concat-integral instance " + std::to_string(rep));
      }
    }
    out.table.add({"concat-integral", std::to_string(instances), std::to_string(bad)});
  }

  {
    // Tail payoffs of random trees against laws from their closed correspondence.
    std::size_t n = 0;
    bad = 0;
    for (std::uint64_t t = 0; n < instances; ++t) {
      auto model = random_tree<R>(seed * 1000 + t, {2 + t % 2, 2, 2, 0});
      auto sp = model.space();
      auto G = model.objective();
      auto p = model.correspondence(TreeVariant::Closed);
      auto set = p(model.root());
      Kernel<R> nu = [&](const Path& w) { return (*p(w))[tcdpp::detail::path_hash(w) % p(w)->size()]; };
      for (const auto& tau : model.stopping_times())
        for (std::size_t i = 0; i < set->size() && n < instances; i += 1 + set->size() / 5, ++n) {
          const auto& mu = (*set)[i];
          R lhs = integrate(concat_measure(sp, mu, tau, nu), G);
          R rhs(0);
          for (const auto& [w, m] : mu.atoms()) {
            GridTime s = tau(w);
            rhs += m * (s.is_infinite() ? G(w) : integrate(nu(truncate(w, s)), G));
          }
          if (lhs != rhs && !bad++) out.fail("tail-integral tree " + std::to_string(t) + " tau " + tau.name());
        }
    }
    out.table.add({"tail-integral", std::to_string(n), std::to_string(bad)});
  }

  for (auto rule : {ConcatRule::Strict, ConcatRule::Adjusted}) {
    PathSpace sp(g3, rule);
    Stream rng(seed, rule == ConcatRule::Strict ? 0x6473 : 0x6461);
    bad = 0;
    for (std::size_t rep = 0; rep < instances; ++rep) {
      auto mu = detail::random_measure(rng, 1 + rng.uniform_int(0, 6), g3);
      auto tau = detail::random_tau(seed * 7919 + 5 * rep + 2);
      if (!(concat_measure(sp, mu, tau, conditional_kernel(sp, mu, tau)) == mu) && !bad++)
        out.fail("disintegration instance " + std::to_string(rep));
    }
    std::string name = rule == ConcatRule::Strict ? "disintegration/strict" : "disintegration/adjusted";
    out.table.add({name, std::to_string(instances), std::to_string(bad)});
  }
  out.note("laws", std::to_string(out.table.rows.size()));
  out.note("instances_per_law", std::to_string(instances));
  return out;
}

// The DPP on random trees in three variants: closed under concatenation and
// disintegration (equality), one property only (the matching inequality).
// Instances whose enumeration exceeds the budget are skipped and counted.
inline Outcome dpp_finite(std::uint64_t seed, std::size_t max_depth, std::size_t instances = 60) {
  using detail::R;
  if (max_depth < 1 || max_depth > 5) throw UsageError("--depth must be in [1, 5]");
  Outcome out{"dpp-finite",
              {{"instance_id", "tau_id", "lhs", "rhs", "geq", "leq", "concat_ok", "disint_ok"}, {}},
              {},
              {}};
  // (depth, branching, base kernels) cycled over; the concatenation-only
  // variant grows fastest, so deep trees get one base kernel and a small
  // enumeration budget that rejects oversized draws early.
  static const std::vector<std::array<std::size_t, 3>> shapes{
      {2, 2, 2}, {3, 2, 2}, {2, 3, 2}, {4, 2, 1}, {3, 3, 2}, {5, 2, 1}, {3, 2, 1}, {4, 2, 2}, {5, 2, 1}, {1, 3, 2}};
  std::size_t done = 0, skipped = 0, deepest = 0;
  bool strict_geq = false, strict_leq = false;
  for (std::size_t i = 0; done < instances && i < 4 * instances; ++i) {
    const auto shape = shapes[i % shapes.size()];
    const std::size_t depth = std::min(shape[0], max_depth);
    TreeParams prm{depth, shape[1], shape[2], 1};
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> fails;
    bool sg = false, sl = false;
    try {
      auto m = random_tree<R>(seed * 100003 + i, prm, 4000);
      auto sp = m.space();
      auto G = m.objective();
      auto sample = m.sample_paths(2);
      auto taus = m.stopping_times();
      State x0 = TreeModel<R>::state(m.root());
      for (auto v : {TreeVariant::Closed, TreeVariant::ConcatOnly, TreeVariant::DisintOnly}) {
        const std::string id = std::to_string(i) + "-" + variant_name(v);
        auto p = m.correspondence(v);
        PropertyOptions opt;
        opt.seed = seed + i;
        bool conc = check_concatenable(sp, p, taus, sample, opt).ok;
        bool dis = check_disintegrable(sp, p, taus, sample, opt).ok;
        if (v != TreeVariant::DisintOnly && !conc) fails.push_back(id + ": not concatenable");
        if (v != TreeVariant::ConcatOnly && !dis) fails.push_back(id + ": not disintegrable");
        ValueFunction<R> vf(p, G);
        if (vf(m.root()) != m.oracle_value(v, x0)) fails.push_back(id + ": value differs from backward induction");
        for (const auto& tau : taus) {
          auto r = verify_dpp(sp, p, G, tau, m.root(), &vf);
          rows.push_back({id, tau.name(), format_scalar(r.lhs), format_scalar(r.rhs), flag(r.geq), flag(r.leq),
                          flag(conc), flag(dis)});
          if (v == TreeVariant::Closed && !r.equal()) fails.push_back(id + " " + tau.name() + ": lhs != rhs");
          if (v == TreeVariant::ConcatOnly && !r.geq) fails.push_back(id + " " + tau.name() + ": lhs < rhs");
          if (v == TreeVariant::DisintOnly && !r.leq) fails.push_back(id + " " + tau.name() + ": lhs > rhs");
          GridTime t = tau(m.root());
          if (tau.name().rfind("const:", 0) == 0 && !t.is_infinite() && r.rhs != m.oracle_rhs(v, x0, t.index()))
            fails.push_back(id + " " + tau.name() + ": rhs differs from backward induction");
          sg |= v == TreeVariant::ConcatOnly && !r.leq;
          sl |= v == TreeVariant::DisintOnly && !r.geq;
        }
      }
    } catch (const PreconditionError&) {
      ++skipped;
      continue;
    }
    ++done;
    deepest = std::max(deepest, depth);
    strict_geq |= sg;
    strict_leq |= sl;
    for (auto& r : rows) out.table.add(std::move(r));
    for (auto& f : fails) out.fail(std::move(f));
  }
  if (done < std::min<std::size_t>(50, instances))
    out.fail("only " + std::to_string(done) + " instances could be enumerated");
  if (!strict_geq) out.fail("no concatenation-only instance with lhs > rhs");
  if (!strict_leq) out.fail("no disintegration-only instance with lhs < rhs");
  out.note("instances", std::to_string(done));
  out.note("skipped", std::to_string(skipped));
  out.note("deepest", std::to_string(deepest));
  out.note("strict_geq", flag(strict_geq));
  out.note("strict_leq", flag(strict_leq));
  return out;
}

namespace detail {

// Chooses a kernel by hashing the increment history.
inline FiniteMeasure<R> hashed_law(const TreeModel<R>& m, std::uint64_t seed) {
  return m.strategy_law(TreeModel<R>::state(m.root()), [&](const std::vector<double>& h) {
    std::uint64_t key = seed;
    for (double d : h) key = tcdpp::detail::mix(key ^ std::hash<double>{}(d + 7.0));
    key = tcdpp::detail::mix(key ^ h.size());
    return static_cast<std::size_t>(key % m.base().size());
  });
}

inline MartTree<R> mart_tree(std::size_t depth, std::vector<double> incs, long long q, std::uint64_t seed) {
  MartTree<R> t;
  t.depth = depth;
  t.incs = std::move(incs);
  t.q = q;
  t.payoff = random_payoff<R>(seed, depth, t.max_jump());
  return t;
}

}  // namespace detail

// Martingale tests on random laws over lattice trees with denominator q: the
// grid test, the one-step test and the kappa characterization agree; the
// correspondence generated by {increment} on the +-1 tree is exactly the set
// of conditionally unbiased laws; the DPP holds on it with equality.
inline Outcome dpp_mart(std::uint64_t seed, long long q, std::size_t trees = 60, std::size_t payoffs = 3) {
  using detail::R;
  if (q < 1) throw UsageError("--denominator must be positive");
  Outcome out{"dpp-mart", {{"instance_id", "check", "item", "value", "ok"}, {}}, {}, {}};
  const auto inc = functionals::increment(1, 1);
  const auto csq = functionals::compensated_square(1, 0, 1);

  std::size_t mart = 0, nonmart = 0;
  for (std::size_t i = 0; i < trees; ++i) {
    const std::uint64_t s = seed * 1000 + i;
    std::vector<double> incs = i % 2 ? std::vector<double>{-1, 1} : std::vector<double>{-1, 0, 1};
    auto mt = detail::mart_tree(2 + i % 2, incs, q, s);
    auto m = i % 3 == 0 ? mt.candidates() : mt.unbiased();
    auto mu = detail::hashed_law(m, s);
    QStopFamily qs = QStopFamily::finest(mu);
    std::vector<StoppingTime> kappas{StoppingTime::constant(GridTime(0)), StoppingTime::constant(GridTime(1)),
                                     StoppingTime::never(), first_at_level(1, 1), first_at_level(1, -1)};
    for (const auto& f : {inc, csq, functionals::zero()}) {
      bool grid = is_canonical_local_mart(f, mu, qs).ok;
      bool ok = grid == is_martingale_onestep(f, mu).ok;
      for (const auto& k : kappas) ok = ok && grid == mart_char_at(f, k, mu, qs).ok;
      out.table.add({"tree-" + std::to_string(i), "equivalence", f.name, flag(grid), flag(ok)});
      if (!ok) out.fail("tree " + std::to_string(i) + " " + f.name + ": martingale tests disagree");
      if (f.name == inc.name) (grid ? mart : nonmart)++;
    }
  }
  if (mart == 0 || nonmart == 0) out.fail("the random laws did not cover both outcomes");

  // The +-1 tree at denominator q, and the three-point tree at denominator
  // min(q, 2), where the unbiased laws are no longer unique.
  struct Lattice {
    std::string id;
    std::vector<double> incs;
    long long q;
  };
  for (const Lattice& lat : {Lattice{"pm1-q" + std::to_string(q), {-1, 1}, q},
                             Lattice{"three-q" + std::to_string(std::min(q, 2LL)), {-1, 0, 1}, std::min(q, 2LL)}}) {
    auto mt = detail::mart_tree(2, lat.incs, lat.q, seed);
    auto cand = mt.candidates();
    auto unb = mt.unbiased();
    std::function<MeasureSet<R>(const State&)> cf = [&](const State& x) { return cand.laws(TreeVariant::Closed, x); };
    auto p = generate_correspondence<R>({inc}, &TreeModel<R>::state, cf);
    auto sample = cand.sample_paths(4);
    for (std::size_t k = 0; k < sample.size(); ++k) {
      auto expect = unb.strategy_laws(TreeModel<R>::state(sample[k]));
      std::sort(expect.begin(), expect.end());
      expect.erase(std::unique(expect.begin(), expect.end()), expect.end());
      auto got = p(sample[k]);
      bool ok = *got == expect;
      out.table.add({lat.id, "generated", "path-" + std::to_string(k), std::to_string(got->size()), flag(ok)});
      if (!ok) out.fail(lat.id + ": generated correspondence differs from the unbiased laws at path " + std::to_string(k));
    }

    auto sp = cand.space();
    auto dsample = unb.sample_paths(3, true);
    auto x0 = TreeModel<R>::state(cand.root());
    for (std::size_t j = 0; j < payoffs; ++j) {
      auto u = detail::mart_tree(2, lat.incs, lat.q, seed * 31 + j).unbiased();
      const std::string id = lat.id + "-g" + std::to_string(j);
      for (const auto& tau : u.stopping_times()) {
        auto r = verify_dpp_mart<R>(sp, {inc}, &TreeModel<R>::state, cf, u.objective(), tau, cand.root(), dsample);
        bool ok =
            r.hypotheses() && r.dpp_computed && r.dpp.equal() && r.dpp.lhs == u.oracle_value(TreeVariant::Closed, x0);
        out.table.add({id, "dpp", tau.name(), r.dpp_computed ? format_scalar(r.dpp.lhs) : "", flag(ok)});
        if (!ok) out.fail(id + " " + tau.name() + ": DPP not exact");
      }
    }
  }
  out.note("martingale_laws", std::to_string(mart));
  out.note("non_martingale_laws", std::to_string(nonmart));
  return out;
}

}  // namespace tcdpp::cli
