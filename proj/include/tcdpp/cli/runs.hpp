#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "tcdpp/cli/report.hpp"
#include "tcdpp/diffusion/hjb.hpp"
#include "tcdpp/follower/follower.hpp"
#include "tcdpp/follower/tree.hpp"

// Monte-Carlo experiments driven by flat configs.
namespace tcdpp::cli {

struct RunOutput {
  std::vector<Outcome> parts;  // parts[0] is the results table
  std::vector<Series> plot;
  std::string plot_title;

  bool pass() const {
    for (const auto& p : parts)
      if (!p.pass()) return false;
    return true;
  }
};

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string t;
  while (std::getline(ss, t, sep)) out.push_back(trim(t));
  return out;
}

// ---- controlled diffusion ----

inline const std::vector<std::string>& diffusion_keys() {
  static const std::vector<std::string> keys{
      "seed",        "dim",         "beta",         "labels",      "sigma",         "lo",
      "hi",          "horizon",     "payoff",       "dt",          "dpp_dt",        "paths",
      "x0",          "grid_h",      "store_dt",     "differencing", "tau",          "policies",
      "tolerance_c", "viscosity",   "viscosity_h",  "viscosity_store_dt", "viscosity_c", "bump_node",
      "bump",        "svg"};
  return keys;
}

namespace detail {

inline diffusion::Model1D diffusion_model(const Config& c) {
  if (c.number("dim", 1) != 1) throw UsageError("only dim = 1 is supported");
  auto labels = c.numbers("labels", {-1, 0, 1});
  if (labels.empty()) throw UsageError("labels must not be empty");
  double sigma = c.number("sigma", 1), lo = c.number("lo", -2), hi = c.number("hi", 2);
  double horizon = c.number("horizon", 1);
  if (!(lo < hi) || !(horizon > 0)) throw UsageError("need lo < hi and horizon > 0");
  auto [name, arg] = selector(c.text("beta", "control"));
  if (name == "control") return diffusion::controlled_drift(labels, sigma, lo, hi, horizon);
  if (name == "ou") return diffusion::ou_drift(labels, parse_number("beta", arg), sigma, lo, hi, horizon);
  throw UsageError("unknown beta '" + name + "'; builtins: control, ou:theta");
}

inline diffusion::Payoff diffusion_payoff(const Config& c) {
  auto parts = split(c.text("payoff", "bump:0.5:0.5"), ':');
  if (parts[0] == "bump" && parts.size() == 3)
    return diffusion::bump(parse_number("payoff", parts[1]), parse_number("payoff", parts[2]));
  throw UsageError("unknown payoff '" + c.text("payoff", "") + "'; builtins: bump:center:width");
}

inline diffusion::StopRule diffusion_tau(const std::string& s) {
  auto [name, arg] = selector(s);
  if (name == "ball_exit") return diffusion::stops::ball_exit(parse_number("tau", arg));
  if (name == "at_time") return diffusion::stops::at_time(parse_number("tau", arg));
  if (name == "never") return diffusion::stops::never();
  throw UsageError("unknown tau '" + s + "'; builtins: ball_exit:r, at_time:t, never");
}

inline diffusion::Differencing differencing(const std::string& s) {
  if (s == "central") return diffusion::Differencing::Central;
  if (s == "upwind") return diffusion::Differencing::Upwind;
  throw UsageError("differencing must be central or upwind");
}

inline Outcome viscosity_suite(const diffusion::ControlledSDE& sde, const diffusion::Payoff& g, double h,
                               double store_dt, double C, std::size_t bj, std::size_t bi, double bump) {
  using namespace diffusion;
  Outcome out{"viscosity",
              {{"check", "node", "supersolution", "subsolution", "h_lower", "h_upper", "tolerance"}, {}},
              {},
              {}};
  auto v = hjb_solve(sde, g, {h, hjb_max_dt(sde, h), store_dt});
  ViscositySpec spec;
  spec.C = C;
  std::size_t checked = 0, bad = 0;
  double worst_lo = -1e300, worst_hi = 1e300, tol = 0;
  for (std::size_t j = spec.r; j + spec.r < v.nt; ++j)
    for (std::size_t i = spec.r; i + spec.r < v.nx; ++i) {
      auto r = viscosity_check(v, j, i, sde, spec);
      ++checked;
      worst_lo = std::max(worst_lo, r.h_lower);
      worst_hi = std::min(worst_hi, r.h_upper);
      tol = r.tolerance;
      if (!(r.supersolution && r.subsolution) && !bad++)
        out.fail("node " + std::to_string(j) + "," + std::to_string(i) + " fails the viscosity test");
    }
  out.table.add({"interior", std::to_string(checked) + " nodes", flag(bad == 0), flag(bad == 0),
                 format_double(worst_lo), format_double(worst_hi), format_double(tol)});
  if (bj < spec.r || bj + spec.r >= v.nt || bi < spec.r || bi + spec.r >= v.nx)
    throw UsageError("bump_node must be an interior node");
  for (double b : {bump, -bump}) {
    auto p = v;
    p.at(bj, bi) += b;
    auto r = viscosity_check(p, bj, bi, sde, spec);
    out.table.add({"bump:" + format_double(b), std::to_string(bj) + ":" + std::to_string(bi), flag(r.supersolution),
                   flag(r.subsolution), format_double(r.h_lower), format_double(r.h_upper),
                   format_double(r.tolerance)});
    if (r.supersolution && r.subsolution) out.fail("bump " + format_double(b) + " not detected");
  }
  out.note("nodes_checked", std::to_string(checked));
  out.note("node_failures", std::to_string(bad));
  return out;
}

}  // namespace detail

// The viscosity test at every node of a coarse FD solution whose ball fits in
// the grid, plus a bump of +-bump at bump_node that must be caught.
inline Outcome run_viscosity(const Config& c) {
  auto sde = diffusion::space_time(detail::diffusion_model(c));
  auto node = split(c.text("bump_node", "128:40"), ':');
  if (node.size() != 2) throw UsageError("bump_node must be j:i");
  return detail::viscosity_suite(sde, detail::diffusion_payoff(c), c.number("viscosity_h", 0.05),
                                 c.number("viscosity_store_dt", 1.0 / 256), c.number("viscosity_c", 5),
                                 static_cast<std::size_t>(parse_number("bump_node", node[0])),
                                 static_cast<std::size_t>(parse_number("bump_node", node[1])), c.number("bump", 0.05));
}

// Rows (x0, v_mc, stderr, v_fd, dpp_lhs, dpp_rhs, z). A row passes when
// |v_mc - v_fd| <= max(3 stderr, C (h + sqrt(dt))) and |z| <= 3.
inline RunOutput run_diffusion(const Config& c) {
  using namespace diffusion;
  const std::uint64_t seed = c.seed();
  auto model = detail::diffusion_model(c);
  auto sde = space_time(model);
  auto g = detail::diffusion_payoff(c);
  const double dt = c.number("dt", 1.0 / 256), dpp_dt = c.number("dpp_dt", dt);
  const std::size_t paths = c.count("paths", 100000);
  auto xs = c.numbers("x0", {-1, -0.5, 0, 0.5, 1});
  const double C = c.number("tolerance_c", 5);
  auto tau = detail::diffusion_tau(c.text("tau", "ball_exit:0.5"));
  if (!(dt > 0) || !(dpp_dt > 0) || paths < 2) throw UsageError("need dt > 0, dpp_dt > 0 and paths >= 2");

  HjbSpec hs{c.number("grid_h", 0.01), 0, c.number("store_dt", 1.0 / 1024),
             detail::differencing(c.text("differencing", "central"))};
  hs.dt = hjb_max_dt(sde, hs.h, hs.drift);
  auto v = hjb_solve(sde, g, hs);
  ValueFn vhat = [&v](const double* s) { return v(s); };

  PolicyClass pols;
  std::string spec_list = c.text("policies", "constants,bang_bang:0.5,greedy");
  for (const auto& s : split(spec_list, ',')) {
    auto [name, arg] = selector(s);
    if (name == "constants") {
      for (auto& p : policies::constants(sde)) pols.push_back(p);
    } else if (name == "bang_bang") {
      pols.push_back(policies::bang_bang(sde, parse_number("policies", arg)));
    } else if (name == "greedy") {
      pols.push_back(greedy_policy(sde, v));
    } else {
      throw UsageError("unknown policy '" + s + "'; builtins: constants, bang_bang:c, greedy");
    }
  }

  RunOutput run;
  Outcome res{"diffusion", {{"x0", "v_mc", "stderr", "v_fd", "dpp_lhs", "dpp_rhs", "z"}, {}}, {}, {}};
  Series mc{"v_mc", {}, {}, "#1f77b4"}, fd{"v_fd", {}, {}, "#d62728"};
  double max_gap = 0, max_z = 0;
  for (double x : xs) {
    Vec x0{x, 0.0};
    if (!sde.inside(x0.data())) throw UsageError("x0 = " + format_double(x) + " is outside O");
    auto e = estimate_value(sde, pols, g, x0, {dt, paths, seed});
    auto d = check_dpp_mc(sde, pols, g, x0, tau, vhat, {dpp_dt, paths, seed + 1});
    double vf = v(x, 0);
    res.table.add({format_double(x), format_double(e.value), format_double(e.stderr_), format_double(vf),
                   format_double(d.lhs), format_double(d.rhs), format_double(d.z)});
    double tol = std::max(3 * e.stderr_, C * (hs.h + std::sqrt(dt)));
    if (std::abs(e.value - vf) > tol) res.fail("x0 = " + format_double(x) + ": |v_mc - v_fd| above " + format_double(tol));
    if (!(std::abs(d.z) <= 3)) res.fail("x0 = " + format_double(x) + ": |z| = " + format_double(std::abs(d.z)));
    max_gap = std::max(max_gap, std::abs(e.value - vf));
    max_z = std::max(max_z, std::abs(d.z));
    mc.x.push_back(x), mc.y.push_back(e.value);
  }
  res.note("max_gap", format_double(max_gap));
  res.note("max_abs_z", format_double(max_z));
  for (std::size_t i = 0; i < v.nx; ++i) fd.x.push_back(v.x(i)), fd.y.push_back(v.at(0, i));
  run.parts.push_back(std::move(res));
  run.plot = {fd, mc};
  run.plot_title = "value at t = 0";

  if (c.number("viscosity", 0) != 0) run.parts.push_back(run_viscosity(c));
  return run;
}

// ---- monotone follower ----

inline const std::vector<std::string>& follower_keys() {
  static const std::vector<std::string> keys{"seed",  "fuel",  "running_weight", "terminal_weight", "horizon",
                                             "dt",    "paths", "x0",             "delta",           "dmax",
                                             "tau",   "pairs", "pathwise_paths", "tree_depth",      "svg"};
  return keys;
}

namespace detail {

inline follower::FollowerStop follower_tau(const std::string& s) {
  auto [name, arg] = selector(s);
  if (name == "gap_exit") return follower::stops::gap_exit(parse_number("tau", arg));
  if (name == "step") return follower::stops::at_step(static_cast<std::size_t>(parse_number("tau", arg)));
  if (name == "never") return follower::stops::never();
  throw UsageError("unknown tau '" + s + "'; builtins: gap_exit:r, step:j, never");
}

// Integer gamma and nondecreasing integer alpha, so every sum is exact.
inline std::pair<Path, Path> random_pair(Stream& rng, std::size_t steps) {
  TimeGrid g(1.0, steps);
  std::vector<double> gamma, alpha{static_cast<double>(rng.uniform_int(0, 3))};
  for (std::size_t k = 0; k <= steps; ++k) gamma.push_back(static_cast<double>(rng.uniform_int(-3, 3)));
  for (std::size_t k = 1; k <= steps; ++k)
    alpha.push_back(alpha.back() + (rng.uniform() < 0.5 ? 0.0 : static_cast<double>(rng.uniform_int(1, 3))));
  return {Path::cadlag(g, gamma), Path::caglad(g, alpha, true)};
}

}  // namespace detail

// The characterization accepts zeta_0 + left integral and rejects every
// perturbation of it.
inline std::pair<std::size_t, std::string> left_integral_pairs(std::uint64_t seed, std::size_t pairs) {
  using namespace follower;
  Stream rng(seed, 0x6c69);
  std::size_t bad = 0;
  std::string first;
  for (std::size_t trial = 0; trial < pairs; ++trial) {
    auto [gamma, alpha] = detail::random_pair(rng, static_cast<std::size_t>(rng.uniform_int(1, 6)));
    auto z = left_integral_values(gamma, alpha);
    double z0 = static_cast<double>(rng.uniform_int(-5, 5));
    for (auto& v : z) v += z0;
    bool ok = left_integral_characterization(z, gamma, alpha);
    auto cand = z;
    for (std::size_t k = 1; k < cand.size(); ++k)
      if (rng.uniform() < 0.3) cand[k] += static_cast<double>(rng.uniform_int(1, 2)) * (rng.uniform() < 0.5 ? -1 : 1);
    bool same = cand == z;
    ok = ok && left_integral_characterization(cand, gamma, alpha) == same;
    if (!ok && !bad++) first = "pair " + std::to_string(trial);
  }
  return {bad, first};
}

// Rows (x0, v_mc, stderr, v_dp, dpp_lhs, dpp_rhs, z, delta_bias) for the
// classical follower; a second table holds the exact checks.
inline RunOutput run_follower(const Config& c) {
  using namespace follower;
  const std::uint64_t seed = c.seed();
  auto p = quadratic_follower(c.number("fuel", 0.5), c.number("running_weight", 1), c.number("terminal_weight", 1));
  auto inst = classical_instance(p);
  const double T = c.number("horizon", 1), dt = c.number("dt", 1.0 / 256);
  const double delta = c.number("delta", 0.1), dmax = c.number("dmax", 4);
  const std::size_t paths = c.count("paths", 100000);
  auto xs = c.numbers("x0", {-0.5, 0, 0.5});
  auto tau = detail::follower_tau(c.text("tau", "gap_exit:1"));
  if (!(T > 0) || !(dt > 0) || !(delta > 0) || paths < 2) throw UsageError("need horizon, dt, delta > 0 and paths >= 2");

  auto o = solve_follower_dp(p, T, dt, delta, dmax);
  auto oh = solve_follower_dp(p, T, dt, delta / 2, dmax);
  auto cls = strategies::classical_class(oh);
  auto vhat = [&oh](const double* x) { return oh(x); };

  RunOutput run;
  Outcome res{"follower",
              {{"x0", "v_mc", "stderr", "v_dp", "dpp_lhs", "dpp_rhs", "z", "delta_bias"}, {}},
              {},
              {}};
  Series mc{"v_mc", {}, {}, "#1f77b4"}, dp{"v_dp", {}, {}, "#d62728"};
  for (double w0 : xs) {
    auto x0 = classical_start(T, w0);
    auto e = estimate_follower_value(inst, cls, x0, {dt, paths, seed});
    auto d = check_dpp_follower(inst, cls, x0, tau, vhat, {dt, paths, seed + 1});
    double v_dp = o(x0.data()), bias = std::abs(v_dp - oh(x0.data()));
    res.table.add({format_double(w0), format_double(e.v_mc), format_double(e.stderr_), format_double(v_dp),
                   format_double(d.lhs), format_double(d.rhs), format_double(d.z), format_double(bias)});
    double tol = std::max(3 * e.stderr_, bias);
    if (std::abs(e.v_mc - v_dp) > tol) res.fail("w0 = " + format_double(w0) + ": |v_mc - v_dp| above " + format_double(tol));
    if (!(std::abs(d.z) <= 3)) res.fail("w0 = " + format_double(w0) + ": |z| = " + format_double(std::abs(d.z)));
    mc.x.push_back(w0), mc.y.push_back(e.v_mc);
  }
  for (double w = -2; w <= 2 + 1e-9; w += 0.05) {
    auto x0 = classical_start(T, w);
    dp.x.push_back(w), dp.y.push_back(o(x0.data()));
  }
  run.parts.push_back(std::move(res));
  run.plot = {dp, mc};
  run.plot_title = "follower value at t = 0";

  Outcome chk{"follower-checks", {{"check", "instances", "failures"}, {}}, {}, {}};
  {
    auto [bad, first] = left_integral_pairs(seed, c.count("pairs", 1000));
    chk.table.add({"left-integral", std::to_string(c.count("pairs", 1000)), std::to_string(bad)});
    if (bad) chk.fail("left-integral characterization: " + first);
  }
  {
    // Z must equal the grid left integral of c(Y) against alpha, exactly.
    const std::size_t n = c.count("pathwise_paths", 200);
    std::size_t checked = 0, bad = 0;
    for (const auto& st : cls) {
      auto law = simulate_follower(inst, st, classical_start(T, 0.3), {dt, n, seed + 2});
      for (const auto& w : law.samples()) {
        Path a = project(w, 2);
        bool ok = true;
        for (std::size_t i = 0; i < inst.m; ++i) {
          auto z = left_integral_values(coupling_path(inst, w, i), a);
          for (std::size_t k = 0; k < w.grid().size(); ++k) ok = ok && w.component(1).at(k, i) == z[k];
        }
        ++checked;
        if (!ok && !bad++) chk.fail("simulated Z differs from the left integral under " + st.name);
      }
    }
    chk.table.add({"pathwise-z", std::to_string(checked), std::to_string(bad)});
  }
  {
    FollowerTree<Rational> tree;
    tree.depth = c.count("tree_depth", 3);
    if (tree.depth < 1 || tree.depth > 3) throw UsageError("tree_depth must be in [1, 3]");
    PropertyOptions opt;
    opt.seed = seed;
    auto r = check_correspondence_split(tree, opt);
    chk.table.add({"tree-split", std::to_string(r.dpp.size()), std::to_string(r.failures.size())});
    for (const auto& f : r.failures) chk.fail("tree: " + f);
    chk.note("tree_value", format_scalar(r.value));
    chk.note("tree_laws", std::to_string(r.intersection));
  }
  run.parts.push_back(std::move(chk));
  return run;
}

}  // namespace tcdpp::cli
