#include <boost/version.hpp>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tcdpp/cli/report.hpp"
#include "tcdpp/cli/runs.hpp"
#include "tcdpp/cli/suites.hpp"

namespace fs = std::filesystem;
using namespace tcdpp;
using namespace tcdpp::cli;

namespace {

// TCDPP_OUTPUT_DIR, when set, is the base for relative output paths.
fs::path output_path(const std::string& p) {
  fs::path out(p);
  if (const char* dir = std::getenv("TCDPP_OUTPUT_DIR"); dir && *dir && out.is_relative()) out = fs::path(dir) / out;
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  return out;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw UsageError("cannot write " + p.string());
  os << text;
}

// results.csv -> results.<part>.csv
fs::path sibling(const fs::path& main, const std::string& part, const std::string& ext) {
  fs::path p = main;
  return p.replace_filename(main.stem().string() + "." + part + ext);
}

struct Job {
  std::string command;
  std::vector<std::pair<std::string, std::string>> config;
  std::uint64_t seed = 0;
  std::optional<std::string> report;  // main CSV path
  std::optional<std::string> svg;
};

int finish(const Job& job, const std::vector<Outcome>& parts, const RunOutput* run, double seconds,
           const std::vector<std::string>& argv) {
  bool pass = true;
  nlohmann::ordered_json m;
  m["command"] = job.command;
  m["argv"] = argv;
  m["seed"] = job.seed;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : job.config) cfg[k] = v;
  m["config"] = cfg;
  m["versions"] = {{"tcdpp", kVersion},
                   {"compiler", __VERSION__},
                   {"cplusplus", __cplusplus},
                   {"boost", BOOST_LIB_VERSION},
                   {"cli11", CLI11_VERSION}};
  nlohmann::ordered_json outputs = nlohmann::ordered_json::array(), results = nlohmann::ordered_json::array();
  std::optional<fs::path> main;
  if (job.report) main = output_path(*job.report);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& p = parts[i];
    pass = pass && p.pass();
    std::cout << (p.pass() ? "PASS " : "FAIL ") << p.name << " (" << p.table.rows.size() << " rows)\n";
    for (const auto& f : p.failures) std::cerr << "  " << f << "\n";
    nlohmann::ordered_json r;
    r["suite"] = p.name;
    r["pass"] = p.pass();
    r["failures"] = p.failures;
    for (const auto& [k, v] : p.summary) r["summary"][k] = v;
    if (main) {
      fs::path f = i == 0 ? *main : sibling(*main, p.name, ".csv");
      write_file(f, p.table.csv());
      outputs.push_back(f.string());
      r["csv"] = f.string();
    } else if (job.report == std::nullopt && job.command == "verify-core") {
      for (const auto& row : p.table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) std::cout << "  " << row[c];
        std::cout << "\n";
      }
    }
    results.push_back(r);
  }
  if (run && job.svg) {
    fs::path s = output_path(*job.svg);
    std::ofstream os(s);
    write_svg(os, run->plot_title, run->plot);
    outputs.push_back(s.string());
  }
  m["outputs"] = outputs;
  m["results"] = results;
  m["pass"] = pass;
  m["wall_time_s"] = seconds;
  if (main) write_file(sibling(*main, "manifest", ".json"), m.dump(2) + "\n");
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic programming verification suites and experiments"};
  app.require_subcommand(1);
  std::vector<std::string> args(argv, argv + argc);

  std::uint64_t seed = 0;
  std::size_t depth = 3, instances = 0;
  long long denominator = 4;
  std::string report, config_path, out, svg;

  auto* core = app.add_subcommand("verify-core", "truncation, concatenation and measure law suites");
  core->add_option("--seed", seed, "seed")->required();
  core->add_option("--instances", instances, "instances per law (default 1000)");
  core->add_option("--report", report, "CSV report");

  auto* fin = app.add_subcommand("dpp-finite", "exact DPP on generated finite trees");
  fin->add_option("--seed", seed, "seed")->required();
  fin->add_option("--depth", depth, "maximal tree depth, 1..5")->required();
  fin->add_option("--instances", instances, "number of generated trees (default 60)");
  fin->add_option("--report", report, "CSV report");

  auto* mart = app.add_subcommand("dpp-mart", "martingale tests and the DPP on generated correspondences");
  mart->add_option("--seed", seed, "seed")->required();
  mart->add_option("--denominator", denominator, "lattice denominator of the kernels")->required();
  mart->add_option("--report", report, "CSV report");

  std::optional<std::uint64_t> seed_flag;
  auto* dif = app.add_subcommand("diffusion", "controlled diffusion: Monte Carlo vs finite differences");
  dif->add_option("--config", config_path, "key = value config")->required();
  dif->add_option("--out", out, "results CSV")->required();
  dif->add_option("--seed", seed_flag, "overrides the config seed");

  auto* fol = app.add_subcommand("follower", "monotone follower: Monte Carlo vs the DP oracle");
  fol->add_option("--config", config_path, "key = value config")->required();
  fol->add_option("--out", out, "results CSV")->required();
  fol->add_option("--seed", seed_flag, "overrides the config seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
  try {
    Job job;
    if (!report.empty()) job.report = report;
    if (*core) {
      job.command = "verify-core";
      job.seed = seed;
      auto n = instances ? instances : 1000;
      job.config = {{"instances", std::to_string(n)}};
      std::vector<Outcome> parts{verify_core(seed, n), measure_algebra(seed, std::max<std::size_t>(200, n / 5))};
      return finish(job, parts, nullptr, elapsed(), args);
    }
    if (*fin) {
      job.command = "dpp-finite";
      job.seed = seed;
      auto n = instances ? instances : 60;
      job.config = {{"depth", std::to_string(depth)}, {"instances", std::to_string(n)}};
      std::vector<Outcome> parts{dpp_finite(seed, depth, n)};
      return finish(job, parts, nullptr, elapsed(), args);
    }
    if (*mart) {
      job.command = "dpp-mart";
      job.seed = seed;
      job.config = {{"denominator", std::to_string(denominator)}};
      std::vector<Outcome> parts{dpp_mart(seed, denominator)};
      return finish(job, parts, nullptr, elapsed(), args);
    }
    const bool is_dif = static_cast<bool>(*dif);
    job.command = is_dif ? "diffusion" : "follower";
    auto cfg = Config::load(config_path, is_dif ? diffusion_keys() : follower_keys());
    if (seed_flag) cfg.set("seed", std::to_string(*seed_flag));
    job.seed = cfg.seed();
    job.config = cfg.entries();
    job.report = out;
    if (cfg.has("svg")) job.svg = cfg.text("svg", "");
    RunOutput run = is_dif ? run_diffusion(cfg) : run_follower(cfg);
    return finish(job, run.parts, &run, elapsed(), args);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const PreconditionError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
