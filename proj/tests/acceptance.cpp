// One PASS/FAIL line per acceptance criterion. Exit status 0 iff all pass.

#include <chrono>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "tcdpp/cli/runs.hpp"
#include "tcdpp/cli/suites.hpp"

using namespace tcdpp;
using namespace tcdpp::cli;

namespace {

const std::string kConfigs = TCDPP_CONFIG_DIR;

struct Verdict {
  bool pass = true;
  std::string detail;
};

// Serialized tables of every run, keyed by criterion, for the rerun check.
using Snapshot = std::map<int, std::string>;

std::string serialize(const std::vector<Outcome>& parts) {
  std::string s;
  for (const auto& p : parts) s += "# " + p.name + "\n" + p.table.csv();
  return s;
}

Verdict judge(const std::vector<Outcome>& parts) {
  Verdict v;
  for (const auto& p : parts) {
    for (const auto& f : p.failures) {
      if (v.pass) v.detail = p.name + ": " + f;
      v.pass = false;
    }
  }
  if (!v.pass) return v;
  for (const auto& p : parts)
    for (const auto& [k, val] : p.summary) v.detail += (v.detail.empty() ? "" : ", ") + k + "=" + val;
  return v;
}

Config diffusion_config() {
  auto c = Config::load(kConfigs + "/diffusion_benchmark.cfg", diffusion_keys());
  c.set("viscosity", "0");
  return c;
}

std::vector<Outcome> criterion(int id, Snapshot* snap) {
  std::vector<Outcome> parts;
  switch (id) {
    case 1: parts = {verify_core(11, 1000)}; break;
    case 2: parts = {measure_algebra(12, 200)}; break;
    case 3: parts = {dpp_finite(13, 5, 60)}; break;
    case 4: parts = {dpp_mart(14, 8)}; break;
    case 5: parts = run_diffusion(diffusion_config()).parts; break;
    case 6: parts = {run_viscosity(Config::load(kConfigs + "/diffusion_benchmark.cfg", diffusion_keys()))}; break;
    case 7: parts = run_follower(Config::load(kConfigs + "/follower_benchmark.cfg", follower_keys())).parts; break;
  }
  if (snap) (*snap)[id] = serialize(parts);
  return parts;
}

}  // namespace

int main() {
  struct Spec {
    int id;
    std::string what;
    double limit_s;
  };
  const std::vector<Spec> specs{
      {1, "truncation/concatenation law suite", 30},
      {2, "measure algebra and disintegration", 30},
      {3, "finite DPP on generated trees", 120},
      {4, "martingale tests and generated correspondences", 120},
      {5, "controlled diffusion vs finite differences", 300},
      {6, "viscosity check and bump detection", 60},
      {7, "monotone follower", 300},
  };

  bool all = true;
  Snapshot first;
  for (const auto& s : specs) {
    auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = judge(criterion(s.id, &first));
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (v.pass && sec >= s.limit_s) v = {false, "runtime " + format_double(sec) + " s over the limit"};
    all = all && v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << s.id << ": " << s.what << " (" << std::fixed
              << std::setprecision(1) << sec << " s) " << v.detail << std::defaultfloat << std::endl;
  }

  // Re-run everything with the same seeds and compare the serialized tables.
  {
    auto t0 = std::chrono::steady_clock::now();
    std::string diff;
    for (const auto& s : specs) {
      Snapshot again;
      try {
        criterion(s.id, &again);
      } catch (const std::exception& e) {
        again[s.id] = std::string("exception: ") + e.what();
      }
      if (again[s.id] != first[s.id]) diff += (diff.empty() ? "" : ", ") + std::to_string(s.id);
    }
    double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool ok = diff.empty();
    all = all && ok;
    std::cout << (ok ? "PASS" : "FAIL") << " criterion 8: same seeds give byte-identical tables (" << std::fixed
              << std::setprecision(1) << sec << " s) " << (ok ? "criteria 1-7 rerun" : "differs: " + diff)
              << std::defaultfloat << std::endl;
  }
  return all ? 0 : 1;
}
