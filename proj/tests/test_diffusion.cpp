#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "tcdpp/diffusion/hjb.hpp"
#include "tcdpp/diffusion/sde.hpp"
#include "tcdpp/diffusion/simulate.hpp"
#include "tcdpp/pathspace/checks.hpp"

using namespace tcdpp;
using namespace tcdpp::diffusion;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// dX = b(x, a) dt + s(x, a) dW on (lo, hi), one dimension, no time coordinate.
ControlledSDE line(Vec labels, std::function<double(double, double)> b, std::function<double(double, double)> s,
                   double lo = -kInf, double hi = kInf) {
  ControlledSDE sde;
  sde.dim = 1;
  sde.labels = labels;
  sde.beta = [labels, b](const double* x, std::size_t a, double* out) { out[0] = b(x[0], labels[a]); };
  sde.sigma = [labels, s](const double* x, std::size_t a, double* out) { out[0] = s(x[0], labels[a]); };
  sde.lo = {lo};
  sde.hi = {hi};
  sde.beta_env = [](const double*) { return kInf; };
  sde.sigma_env = [](const double*) { return kInf; };
  return sde;
}

TestFn square() {
  return {"x^2", [](const double* x) { return x[0] * x[0]; }, [](const double* x, double* g) { g[0] = 2 * x[0]; },
          [](const double*, double* H) { H[0] = 2; }};
}

Payoff first_coord_payoff(std::function<double(double)> f) {
  return {"f", [f](const double* x) { return f(x[0]); }};
}

}  // namespace

TEST(Generator, DisplayedFormula) {
  TestFn lin{"3x", [](const double* x) { return 3 * x[0]; }, [](const double*, double* g) { g[0] = 3; },
             [](const double*, double* H) { H[0] = 0; }};
  auto sde = line({0.5}, [](double, double a) { return a; }, [](double, double) { return 7.0; });
  double x = 1.25;
  EXPECT_DOUBLE_EQ(generator(sde, lin, &x, 0), 1.5);

  auto bm = line({0}, [](double, double) { return 0.0; }, [](double, double) { return 1.0; });
  EXPECT_DOUBLE_EQ(generator(bm, square(), &x, 0), 1.0);

  auto drift = line({2}, [](double, double a) { return a; }, [](double, double) { return 1.0; });
  x = 3;
  EXPECT_DOUBLE_EQ(generator(drift, square(), &x, 0), 13.0);
}

TEST(Generator, SpaceTimeUsesCrossVariance) {
  // gamma = sigma sigma^T for a full 2x2 sigma against a quadratic form.
  ControlledSDE sde;
  sde.dim = 2;
  sde.labels = {0};
  sde.beta = [](const double*, std::size_t, double* b) { b[0] = 0.3, b[1] = -0.2; };
  sde.sigma = [](const double*, std::size_t, double* s) { s[0] = 1, s[1] = 2, s[2] = 0.5, s[3] = -1; };
  sde.lo = {-kInf, -kInf};
  sde.hi = {kInf, kInf};
  // f = x y: grad (y, x), Hessian [[0,1],[1,0]]; gamma_01 = 1*0.5 + 2*(-1) = -1.5
  TestFn f{"xy", [](const double* x) { return x[0] * x[1]; },
           [](const double* x, double* g) { g[0] = x[1], g[1] = x[0]; },
           [](const double*, double* H) { H[0] = 0, H[1] = 1, H[2] = 1, H[3] = 0; }};
  double x[2] = {2, 5};
  EXPECT_NEAR(generator(sde, f, x, 0), 0.3 * 5 - 0.2 * 2 - 1.5, 1e-12);
}

TEST(Generator, HamiltonianIsMaxOverLabels) {
  auto one = line({0.7}, [](double x, double a) { return a * x; }, [](double, double) { return 0.4; });
  double x = 1.5;
  EXPECT_DOUBLE_EQ(hamiltonian(one, square(), &x), generator(one, square(), &x, 0));

  auto pm = line({-1, 1}, [](double, double a) { return a; }, [](double, double) { return 0.0; });
  auto phi = numeric_test_fn("sin", 1, [](const double* y) { return std::sin(y[0]); });
  for (double y : {-2.0, -0.3, 0.0, 0.9, 2.5}) EXPECT_NEAR(hamiltonian(pm, phi, &y), std::abs(std::cos(y)), 1e-7);
}

TEST(QCoord, FamilyShapeAndCutoff) {
  for (std::size_t n : {1u, 2u, 3u}) EXPECT_EQ(qcoord_family(n, 1.0).size(), n + n * n);
  EXPECT_THROW(qcoord_family(2, 0.0), PreconditionError);

  auto fam = qcoord_family(2, 1.5);
  Stream rng(3, 0);
  for (int rep = 0; rep < 100; ++rep) {
    double ang = 2 * std::numbers::pi * rng.uniform();
    double in[2] = {1.4 * rng.uniform() * std::cos(ang), 1.4 * rng.uniform() * std::sin(ang)};
    double out[2] = {(3.01 + rng.uniform()) * std::cos(ang), (3.01 + rng.uniform()) * std::sin(ang)};
    double raw[6] = {in[0], in[1], in[0] * in[0], in[0] * in[1], in[1] * in[0], in[1] * in[1]};
    for (std::size_t k = 0; k < fam.size(); ++k) {
      EXPECT_EQ(fam[k].value(in), raw[k]) << fam[k].name;
      EXPECT_EQ(fam[k].value(out), 0.0) << fam[k].name;
    }
  }
}

TEST(QCoord, ClosedFormDerivativesMatchDifferences) {
  const std::size_t n = 2;
  auto fam = qcoord_family(n, 1.0);
  Stream rng(5, 0);
  for (const auto& f : fam) {
    auto num = numeric_test_fn(f.name, n, f.value, 1e-5);
    for (int rep = 0; rep < 40; ++rep) {
      // sample the annulus where the cutoff is active
      double r = 0.9 + 1.2 * rng.uniform(), ang = 2 * std::numbers::pi * rng.uniform();
      double x[2] = {r * std::cos(ang), r * std::sin(ang)};
      double g1[2], g2[2], h1[4], h2[4];
      f.grad(x, g1);
      num.grad(x, g2);
      f.hess(x, h1);
      num.hess(x, h2);
      for (int i = 0; i < 2; ++i) EXPECT_NEAR(g1[i], g2[i], 1e-6) << f.name;
      for (int i = 0; i < 4; ++i) EXPECT_NEAR(h1[i], h2[i], 2e-3) << f.name;
    }
  }
}

TEST(Sde, EnvelopesOfTheBenchmark) {
  auto sde = space_time(benchmark_model());
  EXPECT_TRUE(check_envelopes(sde, 500, 1).ok);
  sde.sigma_env = [](const double*) { return 0.5; };
  auto r = check_envelopes(sde, 500, 1);
  EXPECT_FALSE(r.ok);
  EXPECT_NE(r.detail.find("volatility"), std::string::npos);
}

TEST(Simulate, DegenerateDynamics) {
  auto still = line({0}, [](double, double) { return 0.0; }, [](double, double) { return 0.0; });
  SimSpec spec{1.0 / 16, 20, 1, 1.0};
  auto law = simulate(still, policies::constant(still, 0), {0.3}, spec);
  for (const auto& w : law.samples())
    for (std::size_t k = 0; k < w.grid().size(); ++k) EXPECT_EQ(w(k, 0), 0.3);

  // ODE x' = 1 on (-inf, 1) from 0: absorbed at 1 at t = 1.
  auto ode = line({0}, [](double, double) { return 1.0; }, [](double, double) { return 0.0; }, -kInf, 1.0);
  spec = {1.0 / 64, 5, 1, 2.0};
  law = simulate(ode, policies::constant(ode, 0), {0.0}, spec);
  for (const auto& w : law.samples()) {
    std::size_t hit = w.grid().size();
    for (std::size_t k = 0; k < w.grid().size(); ++k)
      if (w(k, 0) >= 1.0) {
        hit = k;
        break;
      }
    ASSERT_LT(hit, w.grid().size());
    EXPECT_NEAR(w.grid().time(hit), 1.0, 1.0 / 64 + 1e-12);
    EXPECT_EQ(w(w.grid().steps(), 0), 1.0);
    EXPECT_TRUE(is_absorbed_path(ode, w));
  }
}

TEST(Simulate, BrownianMean) {
  auto bm = line({0}, [](double, double) { return 0.0; }, [](double, double) { return 1.0; });
  const std::size_t N = 4000;
  SimSpec spec{1.0 / 32, N, 11, 1.0};
  auto law = simulate(bm, policies::constant(bm, 0), {0.0}, spec);
  std::vector<double> end;
  for (const auto& w : law.samples()) end.push_back(w(w.grid().steps(), 0));
  auto e = mean_estimate(end);
  EXPECT_LE(std::abs(e.mean), 3.0 / std::sqrt(static_cast<double>(N)));
  // second moment as a sanity check of the increments' variance
  std::vector<double> sq;
  for (double v : end) sq.push_back(v * v);
  EXPECT_NEAR(mean_estimate(sq).mean, 1.0, 4 * std::sqrt(2.0 / N));
}

TEST(Simulate, AbsorptionAndNonAnticipation) {
  auto sde = space_time(benchmark_model());
  PolicyClass pols = policies::constants(sde);
  pols.push_back(policies::bang_bang(sde, 0.5));
  pols.push_back(policies::until_exit(sde, 2, 0.25, policies::bang_bang(sde, -1)));
  SimSpec spec{1.0 / 32, 60, 4};
  for (const auto& pol : pols) {
    auto law = simulate(sde, pol, {1.6, 0.0}, spec);
    std::vector<Path> xis;
    std::size_t absorbed_early = 0;
    for (const auto& w : law.samples()) {
      EXPECT_TRUE(is_absorbed_path(sde, w)) << pol.name;
      EXPECT_EQ(project(w, 1), controls_of(sde, pol, project(w, 0))) << pol.name;
      xis.push_back(project(w, 0));
      if (std::abs(w(w.grid().steps(), 0)) == 2.0) ++absorbed_early;
    }
    auto na = is_non_anticipating([&](const Path& xi) { return controls_of(sde, pol, xi); }, xis);
    EXPECT_TRUE(na.ok) << pol.name << ": " << na.detail;
    if (pol.name == "const:1.000000") {
      EXPECT_GT(absorbed_early, 0u);
    }
  }
}

TEST(Simulate, Errors) {
  auto sde = space_time(benchmark_model());
  EXPECT_THROW(simulate(sde, policies::constant(sde, 0), {2.5, 0.0}, {}), PreconditionError);
  EXPECT_THROW(simulate(sde, policies::constant(sde, 0), {0.0, 0.0}, {0.3, 10, 0}), PreconditionError);
  auto blow = line({0}, [](double x, double) { return x * x; }, [](double, double) { return 0.0; });
  try {
    simulate(blow, policies::constant(blow, 0), {10.0}, {1.0, 3, 9, 40.0});
    FAIL() << "no overflow reported";
  } catch (const SimulationError& e) {
    EXPECT_NE(std::string(e.what()).find("seed 9, path 0"), std::string::npos) << e.what();
  }
}

TEST(EstimateValue, SingleConstantPolicyIsPlainMean) {
  auto sde = space_time(benchmark_model());
  auto g = benchmark_payoff();
  SimSpec spec{1.0 / 64, 500, 21};
  auto pol = policies::constant(sde, 1);
  auto est = estimate_value(sde, {pol}, g, {0.2, 0.0}, spec);
  auto law = simulate(sde, pol, {0.2, 0.0}, spec);
  std::vector<double> vals;
  for (const auto& w : law.samples()) vals.push_back(g(w.point(w.grid().steps()).data()));
  auto plain = mean_estimate(vals);
  EXPECT_EQ(est.value, plain.mean);
  EXPECT_EQ(est.stderr_, plain.stderr_);
}

TEST(EstimateValue, IncreasingPayoffPrefersUp) {
  auto m = controlled_drift({-1, 1}, 0.1, -3, 3, 1);
  auto sde = space_time(m);
  auto g = first_coord_payoff([](double x) { return std::tanh(x); });
  auto est = estimate_value(sde, policies::constants(sde), g, {0.0, 0.0}, {1.0 / 64, 400, 2});
  EXPECT_EQ(est.argmax, 1u);
  // paired seeds: every path is pushed up, so the comparison is pathwise
  EXPECT_GT(est.per_policy[1].mean - est.per_policy[0].mean, 1.0);
}

TEST(EstimateValue, EnlargingTheClassNeverLowersTheEstimate) {
  auto sde = space_time(benchmark_model());
  auto g = benchmark_payoff();
  PolicyClass pols;
  double prev = -kInf;
  std::vector<Policy> pool = {policies::constant(sde, 0), policies::bang_bang(sde, 0.5), policies::constant(sde, 2),
                              policies::constant(sde, 1), policies::bang_bang(sde, 0.0)};
  for (const auto& p : pool) {
    pols.push_back(p);
    double v = estimate_value(sde, pols, g, {-0.4, 0.0}, {1.0 / 64, 300, 8}).value;
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(CheckDppMc, TrivialTimes) {
  auto sde = space_time(benchmark_model());
  auto g = benchmark_payoff();
  PolicyClass pols = policies::constants(sde);
  pols.push_back(policies::bang_bang(sde, 0.5));
  ValueFn wiggle = [](const double* s) { return std::cos(s[0]) + s[1]; };
  SimSpec spec{1.0 / 64, 300, 5};
  Vec x0{0.3, 0.0};
  auto r0 = check_dpp_mc(sde, pols, g, x0, stops::at_time(0), wiggle, spec);
  EXPECT_EQ(r0.lhs, r0.rhs);
  EXPECT_EQ(r0.z, 0.0);

  // vhat = g at the horizon and on the spatial boundary
  ValueFn vg = [&](const double* s) { return g(s); };
  auto rT = check_dpp_mc(sde, pols, g, x0, stops::at_time(1), vg, spec);
  auto est = estimate_value(sde, pols, g, x0, spec);
  EXPECT_EQ(rT.rhs, est.value);
  EXPECT_EQ(rT.stderr_, est.stderr_);
  auto rN = check_dpp_mc(sde, pols, g, x0, stops::never(), vg, spec);
  EXPECT_EQ(rN.rhs, est.value);
}

TEST(CheckDppMc, NestedTimesAgree) {
  auto sde = space_time(benchmark_model());
  auto g = benchmark_payoff();
  HjbSpec hs{0.02, 0, 1.0 / 512, Differencing::Central};
  hs.dt = hjb_max_dt(sde, hs.h, hs.drift);
  auto v = hjb_solve(sde, g, hs);
  ValueFn vhat = [&](const double* s) { return v(s); };
  PolicyClass pols{greedy_policy(sde, v)};
  SimSpec spec{1.0 / 512, 20000, 12};
  Vec x0{-0.3, 0.0};
  auto r1 = check_dpp_mc(sde, pols, g, x0, stops::ball_exit(0.25), vhat, spec);
  auto r2 = check_dpp_mc(sde, pols, g, x0, stops::ball_exit(0.5), vhat, spec);
  EXPECT_LE(std::abs(r1.rhs - r2.rhs), 3 * (r1.stderr_ + r2.stderr_));
  EXPECT_LE(std::abs(r1.z), 3);
  EXPECT_LE(std::abs(r2.z), 3);
}

TEST(MartingaleResidual, DeterministicFlow) {
  auto flow = line({0}, [](double, double) { return 1.0; }, [](double, double) { return 0.0; });
  const double dt = 1.0 / 128;
  auto law = simulate(flow, policies::constant(flow, 0), {0.0}, {dt, 3, 1, 1.0});
  auto fam = qcoord_family(1, 10);
  for (const auto& f : fam) {
    auto r = martingale_residual(flow, law, f, 16);
    EXPECT_LE(r.max_abs_mean, 2 * dt) << f.name;
  }
}

TEST(MartingaleResidual, BrownianSquareAndInjectedBias) {
  auto bm = line({0}, [](double, double) { return 0.0; }, [](double, double) { return 1.0; });
  auto law = simulate(bm, policies::constant(bm, 0), {0.0}, {1.0 / 64, 3000, 17, 1.0});
  auto fam = qcoord_family(1, 10);
  for (const auto& f : fam) EXPECT_LE(martingale_residual(bm, law, f, 16).max_abs_z, 3) << f.name;

  auto wrong = line({0}, [](double, double) { return 0.5; }, [](double, double) { return 1.0; });
  EXPECT_GT(martingale_residual(wrong, law, fam[0], 16).max_abs_z, 3);
}

TEST(MartingaleResidual, ControlledBenchmark) {
  auto sde = space_time(benchmark_model());
  auto law = simulate(sde, policies::bang_bang(sde, 0.5), {0.1, 0.0}, {1.0 / 64, 2000, 23});
  for (const auto& f : qcoord_family(2, 8)) EXPECT_LE(martingale_residual(sde, law, f, 16).max_abs_z, 3.5) << f.name;
}

TEST(ProgressiveVersion, Examples) {
  TimeGrid g(0.25, 4);
  auto alpha = Path::control(g, {0, 0, 2, 2, 2}, 3);
  auto c = progressive_version(Path::control(g, {1, 1, 1, 1, 1}, 3), 1.0);
  for (std::size_t k = 0; k <= 4; ++k) EXPECT_EQ(c(k), 1.0);
  EXPECT_EQ(c.component(0).kind, PathKind::CaglladStep);

  // window dt: the value at t_k is the label on [t_{k-1}, t_k)
  auto one = progressive_version(alpha, 4.0);
  for (std::size_t k = 1; k <= 4; ++k) EXPECT_EQ(one(k), alpha(k - 1));

  // window 2 dt: at t_3 the average of labels 0 and 2 is 1
  auto two = progressive_version(alpha, 2.0);
  EXPECT_EQ(two(2), 0.0);
  EXPECT_EQ(two(3), 1.0);
  EXPECT_EQ(two(4), 2.0);
  EXPECT_THROW(progressive_version(alpha, 0.5), PreconditionError);
}

TEST(Hjb, UncontrolledHeatEquationClosedForm) {
  // labels {a}: v(0, x) = E g(x + a + W_1); the box is wide enough that the
  // boundary is invisible at the test points.
  const double c = 0.3, w = 0.5;
  auto g = bump(c, w);
  for (double a : {0.0, 1.0}) {
    auto sde = space_time(controlled_drift({a}, 1.0, -8, 8, 1));
    HjbSpec spec{0.04, 0, 1.0 / 64};
    spec.dt = hjb_max_dt(sde, spec.h);
    auto ex = hjb_solve(sde, g, spec);
    auto im = hjb_solve_implicit(sde, g, {0.04, 1.0 / 64, 1.0 / 64});
    for (double x : {-1.0, 0.0, 0.5, 1.5}) {
      double s2 = w * w + 1, m = x + a - c;
      double exact = w / std::sqrt(s2) * std::exp(-m * m / (2 * s2));
      EXPECT_NEAR(ex(x, 0), exact, 2 * (0.04 + 1.0 / 64)) << a << " " << x;
      EXPECT_NEAR(im(x, 0), exact, 2 * (0.04 + 1.0 / 64)) << a << " " << x;
      if (a == 0) {
        EXPECT_NEAR(ex(x, 0), exact, 2e-3);
      }
    }
  }
}

TEST(Hjb, CflViolationReportsTheRequiredStep) {
  auto sde = space_time(benchmark_model());
  auto g = benchmark_payoff();
  const double h = 0.05, need = hjb_max_dt(sde, h);
  try {
    hjb_solve(sde, g, {h, 2 * need, 1.0 / 64});
    FAIL() << "CFL violation not reported";
  } catch (const CflViolation& e) {
    EXPECT_NEAR(e.required_dt, need, 1e-12);
  }
  EXPECT_NO_THROW(hjb_solve(sde, g, {h, need, 1.0 / 64}));
  EXPECT_THROW(hjb_solve(sde, g, {0.3, need, 1.0 / 64}), PreconditionError);
}

TEST(Hjb, ImplicitSchemeReproducesTheExplicitOne) {
  auto sde = space_time(benchmark_model());
  auto g = benchmark_payoff();
  const double h = 0.02, dt = 1.0 / 256;
  auto ex = hjb_solve(sde, g, {h, hjb_max_dt(sde, h), dt});
  auto im = hjb_solve_implicit(sde, g, {h, dt, dt});
  double worst = 0;
  for (std::size_t k = 0; k < ex.v.size(); ++k) worst = std::max(worst, std::abs(ex.v[k] - im.v[k]));
  EXPECT_LE(worst, 2 * (h + dt));
  EXPECT_GT(worst, 0.0);
}

TEST(Hjb, ConvergesUnderRefinement) {
  auto sde = space_time(benchmark_model());
  auto g = benchmark_payoff();
  auto solve = [&](double h) { return hjb_solve(sde, g, {h, hjb_max_dt(sde, h), 1.0 / 64}); };
  auto coarse = solve(0.08), mid = solve(0.04), fine = solve(0.02);
  for (double x : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    double d1 = std::abs(coarse(x, 0) - mid(x, 0)), d2 = std::abs(mid(x, 0) - fine(x, 0));
    EXPECT_LE(d1, 0.08 + hjb_max_dt(sde, 0.08)) << x;
    EXPECT_LE(d2, 0.04 + hjb_max_dt(sde, 0.04)) << x;
    EXPECT_LE(d2, d1 + 1e-4) << x;
  }
}

TEST(Hjb, ValueDominatesEveryConstantControl) {
  auto sde = space_time(benchmark_model());
  auto g = benchmark_payoff();
  const double h = 0.04;
  auto v = hjb_solve(sde, g, {h, hjb_max_dt(sde, h), 1.0 / 64});
  for (double a : {-1.0, 0.0, 1.0}) {
    auto one = space_time(controlled_drift({a}, 1.0, -2, 2, 1));
    auto u = hjb_solve(one, g, {h, hjb_max_dt(one, h), 1.0 / 64});
    for (std::size_t k = 0; k < v.v.size(); ++k) EXPECT_GE(v.v[k], u.v[k] - 1e-12);
  }
}

TEST(Viscosity, FiniteDifferenceSolutionPasses) {
  auto sde = space_time(benchmark_model());
  auto g = benchmark_payoff();
  const double h = 0.05;
  auto v = hjb_solve(sde, g, {h, hjb_max_dt(sde, h), 1.0 / 256});
  ViscositySpec spec;
  std::size_t checked = 0;
  double worst = 0;
  for (std::size_t j = spec.r; j + spec.r < v.nt; ++j)
    for (std::size_t i = spec.r; i + spec.r < v.nx; ++i) {
      auto r = viscosity_check(v, j, i, sde, spec);
      ASSERT_TRUE(r.supersolution && r.subsolution) << "node " << j << "," << i << " H- " << r.h_lower << " H+ "
                                                    << r.h_upper << " tol " << r.tolerance;
      worst = std::max({worst, r.h_lower, -r.h_upper});
      ++checked;
    }
  EXPECT_GT(checked, 15000u);
}

TEST(Viscosity, BumpIsDetected) {
  auto sde = space_time(benchmark_model());
  auto g = benchmark_payoff();
  const double h = 0.05;
  auto v = hjb_solve(sde, g, {h, hjb_max_dt(sde, h), 1.0 / 256});
  for (auto [j, i] : {std::pair<std::size_t, std::size_t>{128, 40}, {60, 20}, {200, 55}}) {
    for (double b : {0.05, -0.05}) {
      auto p = v;
      p.at(j, i) += b;
      auto r = viscosity_check(p, j, i, sde);
      EXPECT_FALSE(r.supersolution && r.subsolution) << j << "," << i << " bump " << b;
    }
  }
}

TEST(Viscosity, ConstantGridAndBoundary) {
  auto sde = space_time(benchmark_model());
  ValueGrid c;
  c.lo = -2, c.h = 0.1, c.dt = 0.05, c.nx = 41, c.nt = 21;
  c.v.assign(c.nx * c.nt, 0.7);
  auto r = viscosity_check(c, 10, 20, sde);
  EXPECT_TRUE(r.supersolution);
  EXPECT_TRUE(r.subsolution);
  EXPECT_NEAR(r.h_lower, 0, 1e-9);
  EXPECT_THROW(viscosity_check(c, 10, 1, sde), PreconditionError);
  EXPECT_THROW(viscosity_check(c, 20, 20, sde), PreconditionError);
}

TEST(Benchmark, MonteCarloMatchesTheOracleAtSmallScale) {
  auto sde = space_time(benchmark_model());
  auto g = benchmark_payoff();
  HjbSpec hs{0.02, 0, 1.0 / 256, Differencing::Central};
  hs.dt = hjb_max_dt(sde, hs.h, hs.drift);
  auto v = hjb_solve(sde, g, hs);
  PolicyClass pols = policies::constants(sde);
  pols.push_back(policies::bang_bang(sde, 0.5));
  pols.push_back(greedy_policy(sde, v));
  const double dt = 1.0 / 256;
  for (double x : {-1.0, 0.5}) {
    auto e = estimate_value(sde, pols, g, {x, 0.0}, {dt, 10000, 31});
    EXPECT_LE(std::abs(e.value - v(x, 0)), std::max(3 * e.stderr_, 5 * (hs.h + std::sqrt(dt)))) << x;
    // the feedback rule built from the oracle is (near) the best of the class
    EXPECT_GE(e.per_policy.back().mean + 3 * e.stderr_, e.value) << x;
  }
}
