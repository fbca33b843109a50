#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tcdpp/concat/checks.hpp"
#include "tcdpp/pathspace/random_paths.hpp"
#include "tcdpp/pathspace/serialize.hpp"
#include "tcdpp/pathspace/space_time_measure.hpp"

namespace tcdpp {

struct LawResult {
  std::string law;
  std::string kind;
  std::size_t instances = 0;
  std::size_t failures = 0;
  std::string first_failure;

  bool ok() const { return failures == 0 && instances > 0; }
};

namespace detail {

// Hitting time of a label that is observable from time k on: for control
// classes the label of cell [t_{k-1}, t_k) is known at t_k.
inline StoppingTime revealed_label_hit(double label) {
  return StoppingTime("reveal:" + std::to_string(label), [label](const Path& w) {
    for (std::size_t k = 1; k < w.grid().size(); ++k)
      if (w(k - 1) == label) return GridTime(k);
    return GridTime::infinity();
  });
}

inline StoppingTime random_stopping_time(Stream& rng, const Path& like) {
  const auto& g = like.grid();
  switch (rng.uniform_int(0, 3)) {
    case 0: return StoppingTime::constant(GridTime(static_cast<std::size_t>(rng.uniform_int(0, g.steps()))));
    case 1: return StoppingTime::never();
    default: {
      if (like.component(0).kind == PathKind::ControlClass)
        return revealed_label_hit(static_cast<double>(rng.uniform_int(0, like.component(0).labels - 1)));
      double level = static_cast<double>(rng.uniform_int(-2, 2));
      return first_hitting("ge:" + std::to_string(level),
                           [level](const std::vector<double>& x) { return x[0] >= level; });
    }
  }
}

// Real-valued TC-morphism used for the increment identity.
inline Path increment_functional(const Path& w) {
  const auto& c = w.component(0);
  std::vector<double> v(w.grid().size());
  if (c.kind == PathKind::ControlClass) {
    for (std::size_t k = 1; k < v.size(); ++k) v[k] = v[k - 1] + (c.at(k - 1) != c.neutral ? 1.0 : 0.0);
  } else {
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = c.at(k, 0) - c.at(0, 0);
  }
  return Path::cadlag(w.grid(), std::move(v));
}

class LawCounter {
 public:
  LawCounter(std::string law, std::string kind) { r_.law = std::move(law), r_.kind = std::move(kind); }
  void record(bool ok, const std::function<std::string()>& detail) {
    ++r_.instances;
    if (!ok && r_.failures++ == 0) r_.first_failure = detail();
  }
  LawResult result() const { return r_; }

 private:
  LawResult r_;
};

}  // namespace detail

// Randomized T- and TC-space law suite over the four path kinds. Values are
// small integers so every identity is checked with exact equality.
inline std::vector<LawResult> run_path_laws(std::uint64_t seed, std::size_t instances) {
  using detail::LawCounter;
  std::vector<LawResult> out;
  const TimeGrid g(0.25, 6);
  const PathKind kinds[] = {PathKind::CadlagStep, PathKind::ContinuousPL, PathKind::CaglladStep,
                            PathKind::ControlClass};
  std::uint64_t stream = 0;
  for (PathKind kind : kinds) {
    std::vector<ConcatRule> rules;
    if (kind == PathKind::ControlClass) rules = {ConcatRule::ControlSplice};
    else rules = {ConcatRule::Strict, ConcatRule::Adjusted};
    const std::string kn = kind_name(kind);
    auto dim_for = [&](Stream& rng) { return kind == PathKind::ControlClass ? 1 : static_cast<std::size_t>(rng.uniform_int(1, 2)); };
    auto csv = [](const Path& p) { return to_csv(p); };

    {
      LawCounter proj("projection", kn), comp("stopping-composition", kn), fixed("stopped-value", kn),
          gal("galmarino", kn);
      Stream rng(seed, stream++);
      for (std::size_t i = 0; i < instances; ++i) {
        Path w = random_path(rng, g, kind, dim_for(rng));
        GridTime s(rng.uniform_int(0, g.steps())), t(rng.uniform_int(0, g.steps()));
        proj.record(truncate(truncate(w, s), t) == truncate(w, min(s, t)), [&] { return csv(w); });
        StoppingTime tau = detail::random_stopping_time(rng, w), kappa = detail::random_stopping_time(rng, w);
        comp.record(truncate_at(truncate_at(w, kappa), tau) == truncate(w, min(tau(w), kappa(w))),
                    [&] { return tau.name() + " " + kappa.name() + "\n" + csv(w); });
        fixed.record(tau(truncate_at(w, tau)) == tau(w), [&] { return tau.name() + "\n" + csv(w); });
        gal.record(is_stopping_time(tau, {w}).ok, [&] { return tau.name() + "\n" + csv(w); });
      }
      for (auto* c : {&proj, &comp, &fixed, &gal}) out.push_back(c->result());
    }

    if (kind == PathKind::CadlagStep) {
      LawCounter pred("predictable-projection", kn);
      Stream rng(seed, stream++);
      for (std::size_t i = 0; i < instances; ++i) {
        Path w = random_path(rng, g, kind, dim_for(rng));
        GridTime s(rng.uniform_int(0, g.steps())), t(rng.uniform_int(0, g.steps()));
        pred.record(truncate_predictable(truncate_predictable(w, s), t) == truncate_predictable(w, min(s, t)),
                    [&] { return csv(w); });
      }
      out.push_back(pred.result());
    }

    for (ConcatRule rule : rules) {
      const Concatenation c(rule);
      const std::string kr = kn + "/" + rule_name(rule);
      LawCounter tc1("TC-1", kr), tc2("TC-2", kr), inv("shift-inverse", kr), loc("shift-locality", kr),
          tccomp("TC-compatibility", kr), incr("increment-identity", kr), agree("strict-adjusted-agree", kr),
          split("split-stopping-time", kr), compo("shifted-composition", kr);
      Stream rng(seed, stream++);
      const PathSpace space(g, c);
      for (std::size_t i = 0; i < instances; ++i) {
        Path w = random_path(rng, g, kind, dim_for(rng));
        GridTime t(rng.uniform_int(0, g.steps()));
        GridTime s(rng.uniform_int(0, g.steps()));
        Path w2 = rng.bernoulli(0.8) ? random_path_from(rng, w, w.point(t)) : random_path_from(rng, w, w.point(s));
        bool comp = c.compatible(w, t, w2);
        auto show = [&] { return "t=" + t.str() + " s=" + s.str() + "\n" + csv(w) + csv(w2); };

        tccomp.record(comp == c.compatible(truncate(w, t), t, w2) && comp == c.compatible(w, t, truncate(w2, s)),
                      show);
        inv.record(c.concat(w, t, c.shift(t, w)) == w, show);
        if (t.index() + s.index() <= g.steps()) {
          GridTime ts(t.index() + s.index());
          loc.record(truncate(c.shift(t, w), s) == truncate(c.shift(t, truncate(w, ts)), s), show);
        }
        if (!comp) continue;
        Path cat = c.concat(w, t, w2);
        tc1.record(cat == c.concat(truncate(w, t), t, w2), show);
        Path lhs = truncate(cat, s);
        Path rhs = s <= t ? truncate(w, s) : c.concat(w, t, truncate(w2, GridTime(s.index() - t.index())));
        tc2.record(lhs == rhs, show);
        if (rule == ConcatRule::Strict)
          agree.record(cat == Concatenation(ConcatRule::Adjusted).concat(w, t, w2), show);

        // F_{k+a}(w *_k w2) - F_{k+b}(w *_k w2) = F_a(w2) - F_b(w2)
        Path fcat = detail::increment_functional(cat);
        Path f2 = detail::increment_functional(w2);
        std::size_t room = g.steps() - t.index();
        std::size_t a = static_cast<std::size_t>(rng.uniform_int(0, room));
        std::size_t b = static_cast<std::size_t>(rng.uniform_int(0, room));
        incr.record(fcat(t.index() + a) - fcat(t.index() + b) == f2(a) - f2(b), show);

        StoppingTime kappa = detail::random_stopping_time(rng, w);
        StoppingTime sigma = detail::random_stopping_time(rng, w);
        StoppingTime composite = compose_shifted_stopping_time(space, kappa, sigma);
        compo.record(is_stopping_time(composite, {w, w2, cat}).ok,
                     [&] { return kappa.name() + "+" + sigma.name() + "\n" + show(); });

        StoppingTime tau("max", [kappa, sigma](const Path& p) { return max(kappa(p), sigma(p)); });
        StoppingTime tail = split_stopping_time(space, tau, kappa, w);
        bool ok = is_stopping_time(tail, {w2, truncate(w2, s), w}).ok;
        GridTime kw = kappa(w);
        if (kw.finite() && c.compatible(w, kw, w2)) {
          GridTime full = tau(c.concat(w, kw, w2)), part = tail(w2);
          ok = ok && (full.is_infinite() ? part.is_infinite() : part.finite() && full.index() == kw.index() + part.index());
        }
        split.record(ok, [&] { return tau.name() + "|" + kappa.name() + "\n" + show(); });
      }
      for (auto* lc : {&tc1, &tc2, &inv, &loc, &tccomp, &incr, &split, &compo}) out.push_back(lc->result());
      if (rule == ConcatRule::Strict) out.push_back(agree.result());
    }
  }
  return out;
}

// Laws on the measure-valued path space. TC-2 at s = t only holds when the
// spliced measures carry no atom at the splice time, so it is checked for
// s != t and, separately, as that exact condition.
inline std::vector<LawResult> run_measure_laws(std::uint64_t seed, std::size_t instances) {
  using detail::LawCounter;
  std::vector<LawResult> out;
  const TimeGrid g(1.0, 5);
  Stream rng(seed, 1000);
  auto random_measure = [&](std::size_t atoms) {
    SpaceTimeMeasure m(g);
    for (std::size_t a = 0; a < atoms; ++a)
      m.add(static_cast<std::size_t>(rng.uniform_int(0, g.steps())), {static_cast<double>(rng.uniform_int(-2, 2))},
            static_cast<double>(rng.uniform_int(1, 4)) / 16.0);
    return m;
  };
  for (bool renorm : {false, true}) {
    const std::string kn = renorm ? "measure/renormalized" : "measure/plain";
    const MeasureSpace sp(g, renorm);
    LawCounter proj("projection", kn), tc1("TC-1", kn), tc2("TC-2 (s != t)", kn), tc2t("TC-2 at s = t", kn),
        inv("shift-inverse", kn);
    for (std::size_t i = 0; i < instances; ++i) {
      auto m = random_measure(static_cast<std::size_t>(rng.uniform_int(1, 4)));
      auto m2 = random_measure(static_cast<std::size_t>(rng.uniform_int(1, 4)));
      GridTime t(rng.uniform_int(0, g.steps())), s(rng.uniform_int(0, g.steps()));
      proj.record(sp.truncate(sp.truncate(m, s), t) == sp.truncate(m, min(s, t)), [] { return std::string(); });
      auto cat = sp.concat(m, t, m2);
      tc1.record(cat == sp.concat(sp.truncate(m, t), t, m2), [] { return std::string(); });
      if (!renorm || m.mass_before(t.index()) < 1)
        inv.record(approx_equal(sp.concat(m, t, sp.shift(t, m)), m, renorm ? 1e-12 : 0), [] { return std::string(); });
      if (s < t) tc2.record(sp.truncate(cat, s) == sp.truncate(m, s), [] { return std::string(); });
      if (s > t)
        tc2.record(sp.truncate(cat, s) == sp.concat(m, t, sp.truncate(m2, GridTime(s.index() - t.index()))),
                   [] { return std::string(); });
      bool holds = sp.truncate(cat, t) == sp.truncate(m, t);
      bool no_atoms = true;
      for (const auto& [k, v] : m.atoms()) no_atoms = no_atoms && k.first != t.index();
      for (const auto& [k, v] : m2.atoms()) no_atoms = no_atoms && k.first != 0;
      tc2t.record(!no_atoms || holds, [] { return std::string(); });
    }
    for (auto* lc : {&proj, &tc1, &tc2, &tc2t, &inv}) out.push_back(lc->result());
  }
  return out;
}

}  // namespace tcdpp
