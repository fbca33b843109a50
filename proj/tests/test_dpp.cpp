#include <gtest/gtest.h>

#include "tcdpp/dpp/tree.hpp"

using namespace tcdpp;

namespace {

using R = Rational;

TreeKernel<R> kern(R up) { return {{{-1.0, R(1) - up}, {1.0, up}}}; }

const TreeKernel<R> A = kern(R(1, 2));
const TreeKernel<R> B = kern(R(3, 4));
const TreeKernel<R> C = kern(R(1, 3));

std::map<double, R> table() { return {{-2, R(3)}, {-1, R(0)}, {0, R(1)}, {1, R(-1)}, {2, R(2)}}; }

TreeModel<R> binary(std::vector<TreeKernel<R>> base, std::vector<TreeKernel<R>> extra = {}) {
  return TreeModel<R>(2, std::move(base), std::move(extra), table());
}

// Root plus the truncations of a few closed-law support paths.
std::vector<Path> small_sample(const TreeModel<R>& m) { return m.sample_paths(2); }

ControlCorrespondence<R> single(const Path&) {
  return ControlCorrespondence<R>::direct([](const Path& v) { return MeasureSet<R>{FiniteMeasure<R>::dirac(v)}; });
}

}  // namespace

TEST(Dpp, ValueTrivial) {
  const TimeGrid g(1.0, 2);
  Path w = Path::cadlag(g, {1, 2, 3});
  Objective<R> G = [](const Path& v) { return R(static_cast<long long>(v(2))); };
  EXPECT_EQ(value(single(w), G, w), R(3));
  FiniteMeasure<R> m1 = FiniteMeasure<R>::dirac(Path::cadlag(g, {0, 0, 2}));
  FiniteMeasure<R> m2 = FiniteMeasure<R>::dirac(Path::cadlag(g, {0, 0, 5}));
  auto p = ControlCorrespondence<R>::direct([&](const Path&) { return MeasureSet<R>{m1, m2}; });
  EXPECT_EQ(value(p, G, w), R(5));
  EXPECT_EQ(eps_selector(p, G, R(1, 10))(w), m2);
  EXPECT_EQ(eps_selector(single(w), G, R(1, 10))(w), FiniteMeasure<R>::dirac(w));
  auto empty = ControlCorrespondence<R>::direct([](const Path&) { return MeasureSet<R>{}; });
  EXPECT_THROW(value(empty, G, w), InvariantError);
}

TEST(Dpp, ExtendedThreshold) {
  EXPECT_EQ(eps_threshold(Extended<R>(R(3)), R(1, 4)), Extended<R>(R(11, 4)));
  EXPECT_EQ(eps_threshold(Extended<R>::pos_inf(), R(1, 4)), Extended<R>(R(4)));
}

// The recursive closure equals the set of laws of all explicit strategy
// tables, and its value equals both backward induction and brute force.
TEST(Dpp, ClosureMatchesStrategyEnumeration) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    TreeParams prm{2 + seed % 2, 2 + (seed / 2) % 2, 2, 0};
    if (prm.depth == 3 && prm.branching == 3) prm.branching = 2;
    auto m = random_tree<R>(seed, prm);
    State x0 = TreeModel<R>::state(m.root());
    auto closed = m.laws(TreeVariant::Closed, x0);
    auto brute = m.strategy_laws(x0);
    std::sort(brute.begin(), brute.end());
    brute.erase(std::unique(brute.begin(), brute.end()), brute.end());
    ASSERT_EQ(closed, brute) << "seed " << seed;
    R best = integrate(brute.front(), m.objective());
    for (const auto& mu : brute) best = std::max(best, integrate(mu, m.objective()));
    auto p = m.correspondence(TreeVariant::Closed);
    EXPECT_EQ(value(p, m.objective(), m.root()), best);
    EXPECT_EQ(value(p, m.objective(), m.root()), m.oracle_value(TreeVariant::Closed, x0));
  }
}

TEST(Dpp, EpsSelectorWithinEpsEverywhere) {
  auto m = random_tree<R>(3, {3, 2, 3, 0});
  auto p = m.correspondence(TreeVariant::Closed);
  auto G = m.objective();
  auto sel = eps_selector(p, G, R(1, 100));
  for (const auto& w : m.sample_paths()) {
    auto mu = sel(w);
    EXPECT_TRUE(p.contains(w, mu));
    EXPECT_GE(integrate(mu, G), value(p, G, w) - R(1, 100));
  }
}

TEST(Dpp, ConcatenableExamples) {
  auto m = binary({A, B});
  auto p = m.correspondence(TreeVariant::Closed);
  auto taus = m.stopping_times();
  EXPECT_TRUE(check_concatenable(m.space(), p, taus, small_sample(m)));
  // drop one law from the root set
  State x0 = TreeModel<R>::state(m.root());
  auto dropped = ControlCorrespondence<R>::factored(&TreeModel<R>::state, [&](const State& x) {
    auto s = m.laws(TreeVariant::Closed, x);
    if (x == x0) s.erase(s.begin() + 1);
    return s;
  });
  auto res = check_concatenable(m.space(), dropped, taus, small_sample(m));
  EXPECT_FALSE(res);
  EXPECT_FALSE(res.detail.empty());
  // point masses on constant paths, tau = INFINITY
  const TimeGrid g(1.0, 2);
  PathSpace sp(g, ConcatRule::Strict);
  auto consts = ControlCorrespondence<R>::direct([](const Path& v) {
    return MeasureSet<R>{FiniteMeasure<R>::dirac(Path::constant(v.grid(), PathKind::CadlagStep, v.point(0)))};
  });
  EXPECT_TRUE(check_concatenable(sp, consts, {StoppingTime::never()}, {Path::cadlag(g, {0, 0, 0})}));
}

TEST(Dpp, DisintegrableExamples) {
  auto m = binary({A, B});
  auto taus = m.stopping_times();
  EXPECT_TRUE(check_disintegrable(m.space(), m.correspondence(TreeVariant::Closed), taus, small_sample(m)));
  // missing the conditional laws: only the first law below the root
  State x0 = TreeModel<R>::state(m.root());
  auto thin = ControlCorrespondence<R>::factored(&TreeModel<R>::state, [&](const State& x) {
    auto s = m.laws(TreeVariant::Closed, x);
    if (x != x0) s.resize(1);
    return s;
  });
  EXPECT_FALSE(check_disintegrable(m.space(), thin, taus, small_sample(m)));
  // tau = 0: conditioning on the start only
  EXPECT_TRUE(check_disintegrable(m.space(), thin, {StoppingTime::constant(GridTime(0))}, small_sample(m)));
}

TEST(Dpp, VerifyTrivialTimes) {
  auto m = binary({A, B});
  auto sp = m.space();
  auto p = m.correspondence(TreeVariant::Closed);
  auto G = m.objective();
  auto never = verify_dpp(sp, p, G, StoppingTime::never(), m.root());
  EXPECT_EQ(never.lhs, never.rhs);
  auto zero = verify_dpp(sp, p, G, StoppingTime::constant(GridTime(0)), m.root());
  EXPECT_EQ(zero.rhs, value(p, G, truncate(m.root(), GridTime(0))));
  EXPECT_TRUE(zero.equal());
}

// Two-period binary tree, two kernels: both sides agree with backward induction.
TEST(Dpp, TwoPeriodBinaryTree) {
  auto m = binary({A, B});
  auto sp = m.space();
  auto p = m.correspondence(TreeVariant::Closed);
  auto G = m.objective();
  State x0 = TreeModel<R>::state(m.root());
  // hand computation: V(1, y) = max over up-probabilities {1/2, 3/4}
  // V(1,-1) = max(2, 3/2) = 2, V(1,1) = max(3/2, 7/4) = 7/4
  // V(2,0) = max(1/2*2 + 1/2*7/4, 1/4*2 + 3/4*7/4) = max(15/8, 29/16) = 15/8
  EXPECT_EQ(m.oracle_value(TreeVariant::Closed, x0), R(15, 8));
  for (const auto& tau : m.stopping_times()) {
    auto r = verify_dpp(sp, p, G, tau, m.root());
    EXPECT_EQ(r.lhs, R(15, 8));
    EXPECT_TRUE(r.equal()) << tau.name();
  }
  EXPECT_EQ(m.oracle_rhs(TreeVariant::Closed, x0, 1), R(15, 8));
}

TEST(Dpp, NonTailObjectiveRejected) {
  auto m = binary({A, B});
  Objective<R> head = [](const Path& w) { return R(static_cast<long long>(w(1, 1))); };
  EXPECT_THROW(verify_dpp(m.space(), m.correspondence(TreeVariant::Closed), head, StoppingTime::constant(GridTime(1)),
                          m.root()),
               PreconditionError);
}

TEST(Dpp, ValueDependsOnlyOnState) {
  auto m = random_tree<R>(11, {3, 2, 2, 0});
  auto p = m.correspondence(TreeVariant::Closed);
  auto G = m.objective();
  std::map<State, R> seen;
  for (const auto& w : m.sample_paths(8)) {
    // recompute without any cache
    R v = value(p, G, w);
    auto [it, fresh] = seen.emplace(TreeModel<R>::state(w), v);
    if (!fresh) { EXPECT_EQ(it->second, v); }
  }
  EXPECT_GT(seen.size(), 3u);
}

// Closed instances satisfy equality; one-property variants satisfy the
// matching one-sided inequality; every side agrees with backward induction.
TEST(Dpp, GeneratedInstances) {
  bool strict_geq = false, strict_leq = false;
  for (std::uint64_t seed = 0; seed < 24; ++seed) {
    auto m = random_tree<R>(seed, {2 + seed % 2, 2, 2, 1});
    auto sp = m.space();
    auto G = m.objective();
    auto sample = small_sample(m);
    auto taus = m.stopping_times();
    State x0 = TreeModel<R>::state(m.root());
    for (auto v : {TreeVariant::Closed, TreeVariant::ConcatOnly, TreeVariant::DisintOnly}) {
      auto p = m.correspondence(v);
      bool conc = check_concatenable(sp, p, taus, sample).ok;
      bool dis = check_disintegrable(sp, p, taus, sample).ok;
      if (v != TreeVariant::DisintOnly) { EXPECT_TRUE(conc) << seed; }
      if (v != TreeVariant::ConcatOnly) { EXPECT_TRUE(dis) << seed; }
      ValueFunction<R> vf(p, G);
      EXPECT_EQ(vf(m.root()), m.oracle_value(v, x0));
      for (const auto& tau : taus) {
        auto r = verify_dpp(sp, p, G, tau, m.root(), &vf);
        if (conc) { EXPECT_TRUE(r.geq) << seed << " " << variant_name(v) << " " << tau.name(); }
        if (dis) { EXPECT_TRUE(r.leq) << seed << " " << variant_name(v) << " " << tau.name(); }
        GridTime t = tau(m.root());
        if (tau.name().rfind("const:", 0) == 0 && !t.is_infinite()) {
          EXPECT_EQ(r.rhs, m.oracle_rhs(v, x0, t.index()));
        }
        strict_geq |= conc && !r.leq;
        strict_leq |= dis && !r.geq;
      }
    }
  }
  EXPECT_TRUE(strict_geq);
  EXPECT_TRUE(strict_leq);
}

TEST(Dpp, CombineIdentityAndEmptyIntersection) {
  auto m = binary({A, B});
  auto p = m.correspondence(TreeVariant::Closed);
  auto self = combine<R>({p, p}, CombineMode::Intersection);
  for (const auto& w : small_sample(m)) EXPECT_EQ(*self(w), *p(w));
  auto pa = binary({A}).correspondence(TreeVariant::Closed);
  auto pc = binary({C}).correspondence(TreeVariant::Closed);
  auto none = combine<R>({pa, pc}, CombineMode::Intersection);
  try {
    none(m.root());
    FAIL() << "expected an error";
  } catch (const InvariantError& e) {
    EXPECT_NE(std::string(e.what()).find("# path"), std::string::npos);
  }
}

TEST(Dpp, UnionsAndIntersections) {
  auto mab = binary({A, B});
  auto mbc = binary({B, C});
  auto mb = binary({B});
  auto sp = mab.space();
  auto taus = mab.stopping_times();
  auto sample = small_sample(mab);
  // union of two single-law sets is not concatenable
  auto uni = combine<R>({binary({A}).correspondence(TreeVariant::DisintOnly),
                         binary({B}).correspondence(TreeVariant::DisintOnly)},
                        CombineMode::Union);
  EXPECT_FALSE(check_concatenable(sp, uni, taus, sample));
  // but it is disintegrable, as a union of disintegrable sets
  EXPECT_TRUE(check_disintegrable(sp, uni, taus, sample));
  // intersection of closures is the closure of the common kernel
  auto inter = combine<R>({mab.correspondence(TreeVariant::Closed), mbc.correspondence(TreeVariant::Closed)},
                          CombineMode::Intersection);
  EXPECT_TRUE(check_concatenable(sp, inter, taus, sample));
  for (const auto& w : sample) EXPECT_EQ(*inter(w), *mb.correspondence(TreeVariant::Closed)(w));
}
