#include <gtest/gtest.h>

#include "tcdpp/martingale/generated.hpp"

using namespace tcdpp;

namespace {

using R = Rational;

std::vector<double> values(const Path& p) {
  std::vector<double> v;
  for (std::size_t k = 0; k < p.grid().size(); ++k) v.push_back(p(k));
  return v;
}

MartTree<R> tree(std::size_t depth, std::vector<double> incs, long long q, std::uint64_t seed = 1) {
  MartTree<R> t;
  t.depth = depth;
  t.incs = std::move(incs);
  t.q = q;
  t.payoff = random_payoff<R>(seed, depth, t.max_jump());
  return t;
}

// A law choosing, at every node, a kernel from `kernels` by hashing the
// history; `markov` makes the choice depend on the current position only.
FiniteMeasure<R> random_law(const TreeModel<R>& m, std::uint64_t seed, bool markov = false) {
  return m.strategy_law(TreeModel<R>::state(m.root()), [&](const std::vector<double>& h) {
    std::uint64_t key = seed;
    if (markov) {
      double y = 0;
      for (double d : h) y += d;
      key = detail::mix(key ^ std::hash<double>{}(y) ^ (h.size() << 20));
    } else {
      for (double d : h) key = detail::mix(key ^ std::hash<double>{}(d + 7.0));
      key = detail::mix(key ^ h.size());
    }
    return key % m.base().size();
  });
}

const auto inc = functionals::increment(1, 1);
const auto csq = functionals::compensated_square(1, 0, 1);

}  // namespace

TEST(Martingale, StopFunctionalExamples) {
  const TimeGrid g(1.0, 3);
  TestFunctional f{"given", [](const Path& w) { return w; }, nullptr};
  Path w = Path::cadlag(g, {0, 2, -3, 4});
  EXPECT_EQ(stop_index(w, 3), 2u);
  EXPECT_EQ(values(stop_functional(f, 3)(w)), (std::vector<double>{0, 2, -3, -3}));
  Path small = Path::cadlag(g, {0, 1, -1, 2});
  EXPECT_EQ(stop_functional(f, 5)(small), small);
  // the cap at time n stops even small paths
  EXPECT_EQ(values(stop_functional(f, 1)(small)), (std::vector<double>{0, 1, 1, 1}));
  EXPECT_THROW(stop_functional(f, 0), PreconditionError);
  auto m = tree(3, {-1, 1}, 2).candidates();
  auto sample = m.sample_paths(6);
  for (std::size_t n = 1; n <= 4; ++n) EXPECT_TRUE(is_non_anticipating(stop_functional(inc, n), sample).ok);
}

TEST(Martingale, QStopsAreStoppingTimes) {
  auto m = tree(2, {-1, 0, 1}, 2).unbiased();
  auto mu = random_law(m, 3);
  QStopFamily qs = QStopFamily::finest(mu);
  auto sample = m.sample_paths(8);
  for (const auto& tau : qs.qstops()) EXPECT_TRUE(is_stopping_time(tau, sample).ok) << tau.name();
}

TEST(Martingale, RandomWalkExamples) {
  auto fair = TreeModel<R>(3, {{{{-1.0, R(1, 2)}, {1.0, R(1, 2)}}}}, {}, random_payoff<R>(0, 3, 1));
  auto biased = TreeModel<R>(3, {{{{-1.0, R(1, 4)}, {1.0, R(3, 4)}}}}, {}, random_payoff<R>(0, 3, 1));
  auto x0 = TreeModel<R>::state(fair.root());
  auto mu = fair.laws(TreeVariant::Closed, x0).front();
  auto nu = biased.laws(TreeVariant::Closed, x0).front();
  EXPECT_TRUE(is_canonical_local_mart(inc, mu, QStopFamily::finest(mu)));
  EXPECT_TRUE(is_canonical_local_mart(csq, mu, QStopFamily::finest(mu)));
  auto w = is_canonical_local_mart(inc, nu, QStopFamily::finest(nu));
  EXPECT_FALSE(w);
  EXPECT_TRUE(w.cell.has_value());
  EXPECT_LT(w.q, w.r);
  EXPECT_TRUE(is_canonical_local_mart(functionals::zero(), nu, QStopFamily::finest(nu)));
  auto kap = first_at_level(1, 1);
  EXPECT_TRUE(mart_char_at(inc, kap, mu, QStopFamily::finest(mu)));
  EXPECT_FALSE(mart_char_at(inc, kap, nu, QStopFamily::finest(nu)));
  EXPECT_TRUE(mart_char_at(inc, StoppingTime::constant(GridTime(0)), mu, QStopFamily::finest(mu)));
}

// The grid test, the one-step test and the kappa characterization agree.
TEST(Martingale, TestEquivalencesOnRandomTrees) {
  int mart = 0, nonmart = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    std::vector<double> incs = seed % 2 ? std::vector<double>{-1, 1} : std::vector<double>{-1, 0, 1};
    auto mt = tree(2 + seed % 2, incs, 4, seed);
    auto m = seed % 3 == 0 ? mt.candidates() : mt.unbiased();
    auto mu = random_law(m, seed);
    QStopFamily qs = QStopFamily::finest(mu);
    std::vector<StoppingTime> kappas{StoppingTime::constant(GridTime(0)), StoppingTime::constant(GridTime(1)),
                                     StoppingTime::never(), first_at_level(1, 1), first_at_level(1, -1)};
    for (const auto& f : {inc, csq, functionals::zero()}) {
      bool grid = is_canonical_local_mart(f, mu, qs).ok;
      ASSERT_EQ(grid, is_martingale_onestep(f, mu).ok) << seed << " " << f.name;
      for (const auto& k : kappas) ASSERT_EQ(grid, mart_char_at(f, k, mu, qs).ok) << seed << " " << f.name << k.name();
      if (f.name == "increment") (grid ? mart : nonmart)++;
    }
  }
  EXPECT_GT(mart, 10);
  EXPECT_GT(nonmart, 5);
}

TEST(Martingale, IncrementIdentityForTcMorphisms) {
  auto m = tree(3, {-1, 0, 1}, 2).candidates();
  auto sp = m.space();
  auto sample = tree(3, {-1, 0, 1}, 2).unbiased().sample_paths(6, true);
  EXPECT_TRUE(is_tc_morphism(sp, inc, sample).ok);
  EXPECT_TRUE(is_tc_morphism(sp, csq, sample).ok);
  EXPECT_FALSE(is_tc_morphism(sp, functionals::naive_square(1, 1), sample).ok);
  for (const auto& w : sample)
    for (const auto& w2 : sample)
      for (std::size_t k = 0; k <= 3; ++k) {
        if (!sp.compatible(w, GridTime(k), w2)) continue;
        Path cat = sp.concat(w, GridTime(k), w2);
        Path fc = inc(cat), f2 = inc(w2);
        for (std::size_t s = 0; k + s <= 3; ++s)
          for (std::size_t t = s; k + t <= 3; ++t) ASSERT_EQ(fc(k + t) - fc(k + s), f2(t) - f2(s));
      }
}

// D = {increment} on the +-1 tree yields exactly the unbiased lattice laws,
// compared with an independent enumeration of strategy tables.
TEST(Martingale, GeneratedMatchesUnbiasedEnumeration) {
  for (auto [incs, q] : {std::pair{std::vector<double>{-1, 1}, 8LL}, std::pair{std::vector<double>{-1, 0, 1}, 2LL}}) {
    auto mt = tree(2, incs, q);
    auto cand = mt.candidates();
    auto unb = mt.unbiased();
    auto p = generate_correspondence<R>({inc}, &TreeModel<R>::state,
                                        [&](const State& x) { return cand.laws(TreeVariant::Closed, x); });
    for (const auto& w : cand.sample_paths(4)) {
      auto expect = unb.strategy_laws(TreeModel<R>::state(w));
      std::sort(expect.begin(), expect.end());
      expect.erase(std::unique(expect.begin(), expect.end()), expect.end());
      ASSERT_EQ(*p(w), expect);
    }
    // D empty: every candidate
    auto all = generate_correspondence<R>({}, &TreeModel<R>::state,
                                          [&](const State& x) { return cand.laws(TreeVariant::Closed, x); });
    EXPECT_EQ(all(cand.root())->size(), cand.laws(TreeVariant::Closed, TreeModel<R>::state(cand.root())).size());
  }
  EXPECT_EQ(tree(2, {-1, 1}, 8).candidates().laws(TreeVariant::Closed, {2, 0}).size(), 585u);
}

TEST(Martingale, CompensatedSquarePinsTransitions) {
  auto mt = tree(2, {-1, 0, 1}, 4);
  auto cand = mt.candidates();
  auto p = generate_correspondence<R>({inc, csq}, &TreeModel<R>::state,
                                      [&](const State& x) { return cand.laws(TreeVariant::Closed, x); });
  TreeKernel<R> half{{{-1.0, R(1, 2)}, {1.0, R(1, 2)}}};
  TreeModel<R> pinned(2, {half}, {}, mt.payoff);
  auto set = p(cand.root());
  ASSERT_EQ(set->size(), 1u);
  EXPECT_EQ(set->front(), pinned.laws(TreeVariant::Closed, {2, 0}).front());
  auto only_inc = generate_correspondence<R>({inc}, &TreeModel<R>::state,
                                             [&](const State& x) { return cand.laws(TreeVariant::Closed, x); });
  EXPECT_GT(only_inc(cand.root())->size(), 1u);
}

TEST(Martingale, GeneratedCorrespondenceIsConcatenableAndDisintegrable) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    auto mt = tree(2 + seed % 2, {-1, 0, 1}, 2, seed);
    auto cand = mt.candidates();
    auto sp = cand.space();
    auto p = generate_correspondence<R>({inc}, &TreeModel<R>::state,
                                        [&](const State& x) { return cand.laws(TreeVariant::Closed, x); });
    auto taus = cand.stopping_times();
    auto sample = mt.unbiased().sample_paths(2);
    EXPECT_TRUE(check_concatenable(sp, p, taus, sample, {20, 2, seed}));
    EXPECT_TRUE(check_disintegrable(sp, p, taus, sample, {20, 2, seed}));
    EXPECT_TRUE(factors_through_state(sp, &TreeModel<R>::state, sample).is_factor);
  }
}

TEST(Martingale, DppOnGeneratedCorrespondence) {
  auto mt = tree(2, {-1, 0, 1}, 2, 5);
  auto cand = mt.candidates();
  auto unb = mt.unbiased();
  auto sp = cand.space();
  auto sample = unb.sample_paths(3, true);
  std::function<MeasureSet<R>(const State&)> cf = [&](const State& x) { return cand.laws(TreeVariant::Closed, x); };
  auto x0 = TreeModel<R>::state(cand.root());
  for (const auto& tau : unb.stopping_times()) {
    auto r = verify_dpp_mart<R>(sp, {inc}, &TreeModel<R>::state, cf, unb.objective(), tau, cand.root(), sample);
    EXPECT_TRUE(r.hypotheses());
    EXPECT_TRUE(r.dpp_computed);
    EXPECT_TRUE(r.dpp.equal()) << tau.name();
    EXPECT_EQ(r.dpp.lhs, unb.oracle_value(TreeVariant::Closed, x0));
  }
  auto one = verify_dpp_mart<R>(sp, {inc}, &TreeModel<R>::state, cf, unb.objective(),
                                StoppingTime::constant(GridTime(1)), cand.root(), sample);
  EXPECT_EQ(one.dpp.rhs, unb.oracle_rhs(TreeVariant::Closed, x0, 1));
  auto bad = verify_dpp_mart<R>(sp, {inc, functionals::naive_square(1, 1)}, &TreeModel<R>::state, cf,
                                unb.objective(), StoppingTime::constant(GridTime(1)), cand.root(), sample);
  EXPECT_FALSE(bad.tc_morphisms);
  // with absorbed paths no candidate makes (w_t - w_0)^2 - t a martingale
  EXPECT_FALSE(bad.dpp_computed);
  EXPECT_FALSE(bad.failures.empty());
}

// Conditioning on the state instead of the path reproduces mu only when mu
// is Markov in the state.
TEST(Martingale, StateConditionalKernel) {
  auto mt = tree(3, {-1, 0, 1}, 2, 2);
  auto unb = mt.unbiased();
  auto sp = unb.space();
  auto p = unb.correspondence(TreeVariant::Closed);
  Kernel<R> fb = [&](const Path& w) { return p(w)->front(); };
  auto x = std::function<State(const Path&)>(&TreeModel<R>::state);
  bool non_markov_breaks = false;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (const auto& tau : unb.stopping_times()) {
      auto mu = random_law(unb, seed, true);
      auto nu = state_conditional_kernel(sp, mu, tau, x, fb);
      EXPECT_EQ(concat_measure(sp, mu, tau, nu), mu) << seed << " " << tau.name();
      for (const auto& [w, m] : mu.atoms()) {
        Path head = sp.truncate(w, tau(w));
        EXPECT_TRUE(p.contains(head, nu(head)));
      }
      auto mu2 = random_law(unb, seed, false);
      auto nu2 = state_conditional_kernel(sp, mu2, tau, x, fb);
      non_markov_breaks |= !(concat_measure(sp, mu2, tau, nu2) == mu2);
      EXPECT_EQ(concat_measure(sp, mu2, tau, conditional_kernel(sp, mu2, tau, fb)), mu2);
    }
  }
  EXPECT_TRUE(non_markov_breaks);
}
