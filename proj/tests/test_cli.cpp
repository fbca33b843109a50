#include <gtest/gtest.h>

#include <sstream>

#include "tcdpp/cli/runs.hpp"
#include "tcdpp/cli/suites.hpp"

using namespace tcdpp;
using namespace tcdpp::cli;

TEST(Config, ParsesKeyValueLines) {
  std::istringstream in("# comment\nseed = 42\n\nx0 = -1, 0.5 ,1/4  # trailing\ndt=1/256\n");
  auto c = Config::parse(in, {"seed", "x0", "dt", "paths"});
  EXPECT_EQ(c.seed(), 42u);
  EXPECT_EQ(c.numbers("x0", {}), (std::vector<double>{-1, 0.5, 0.25}));
  EXPECT_EQ(c.number("dt", 0), 1.0 / 256);
  EXPECT_EQ(c.count("paths", 7), 7u);
  ASSERT_EQ(c.entries().size(), 3u);
  EXPECT_EQ(c.entries()[1].first, "x0");
}

TEST(Config, Errors) {
  std::istringstream unknown("seed = 1\nbogus = 2\n");
  try {
    Config::parse(unknown, {"seed", "paths"});
    FAIL() << "expected a usage error";
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("valid keys: seed, paths"), std::string::npos);
  }
  std::istringstream noeq("seed 1\n");
  EXPECT_THROW(Config::parse(noeq, {"seed"}), UsageError);
  std::istringstream dup("seed = 1\nseed = 2\n");
  EXPECT_THROW(Config::parse(dup, {"seed"}), UsageError);
  std::istringstream empty("");
  auto c = Config::parse(empty, {"seed", "paths"});
  EXPECT_THROW(c.seed(), UsageError);
  c.set("paths", "2.5");
  EXPECT_THROW(c.count("paths", 0), UsageError);
  EXPECT_THROW(parse_number("k", "1/0"), UsageError);
  EXPECT_THROW(parse_number("k", "abc"), UsageError);
  EXPECT_THROW(parse_number("k", "1e999"), UsageError);
}

TEST(Table, CsvQuoting) {
  Table t{{"a", "b"}, {}};
  t.add({"x,y", "say \"hi\""});
  t.add({"1", ""});
  EXPECT_EQ(t.csv(), "a,b\n\"x,y\",\"say \"\"hi\"\"\"\n1,\n");
  EXPECT_THROW(t.add({"only one"}), InvariantError);
}

TEST(Suites, SmallRunsAreDeterministic) {
  auto a = dpp_finite(3, 3, 8), b = dpp_finite(3, 3, 8);
  EXPECT_EQ(a.table.csv(), b.table.csv());
  EXPECT_TRUE(a.table.rows.size() > 0);
  EXPECT_THROW(dpp_finite(3, 6, 8), UsageError);
  auto m = measure_algebra(4, 20);
  EXPECT_TRUE(m.pass()) << m.failures.front();
  EXPECT_EQ(m.table.rows.size(), 4u);
}

TEST(Suites, LeftIntegralPairs) {
  auto [bad, first] = left_integral_pairs(9, 300);
  EXPECT_EQ(bad, 0u) << first;
}

TEST(Runs, BuiltinSelectors) {
  std::istringstream in("seed = 1\nbeta = ou:0.5\npayoff = bump:0:1\npaths = 200\ndt = 1/32\ndpp_dt = 1/32\n"
                        "x0 = 0\ngrid_h = 0.1\nstore_dt = 1/64\ntau = never\npolicies = constants\n");
  auto c = Config::parse(in, diffusion_keys());
  auto run = run_diffusion(c);
  ASSERT_EQ(run.parts.size(), 1u);
  ASSERT_EQ(run.parts[0].table.rows.size(), 1u);
  // dpp_lhs is the oracle at x0
  EXPECT_EQ(run.parts[0].table.rows[0][4], run.parts[0].table.rows[0][3]);
  c.set("tau", "sometimes");
  EXPECT_THROW(run_diffusion(c), UsageError);
  c.set("tau", "never");
  c.set("policies", "psychic");
  EXPECT_THROW(run_diffusion(c), UsageError);
  c.set("policies", "constants");
  c.set("x0", "5");
  EXPECT_THROW(run_diffusion(c), UsageError);
}
