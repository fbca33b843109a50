#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "tcdpp/core/random.hpp"
#include "tcdpp/core/summation.hpp"

using namespace tcdpp;

// Known-answer vectors of Philox4x32-10.
TEST(Philox, KnownAnswers) {
  using B = Philox4x32::Block;
  EXPECT_EQ(Philox4x32::encrypt({0, 0, 0, 0}, {0, 0}), (B{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(Philox4x32::encrypt({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}),
            (B{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  EXPECT_EQ(Philox4x32::encrypt({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}),
            (B{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Stream, DrawsArePureFunctionsOfSeedStreamAndIndex) {
  Stream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  std::vector<std::uint32_t> va, vb;
  for (int i = 0; i < 10; ++i) {
    va.push_back(a.next_u32());
    vb.push_back(b.next_u32());
  }
  EXPECT_EQ(va, vb);
  EXPECT_NE(va.front(), c.next_u32());
  EXPECT_NE(va.front(), d.next_u32());
  EXPECT_EQ(Stream(0, 0).next_u32(), 0x6627e8d5u);
}

TEST(Stream, UniformAndNormalMoments) {
  Stream s(1, 0);
  const int n = 200000;
  std::vector<double> u, z, z2;
  for (int i = 0; i < n; ++i) {
    double x = s.uniform();
    ASSERT_GT(x, 0);
    ASSERT_LT(x, 1);
    u.push_back(x);
    double y = s.normal();
    z.push_back(y);
    z2.push_back(y * y);
  }
  auto mu = mean_estimate(u), mz = mean_estimate(z), mz2 = mean_estimate(z2);
  EXPECT_NEAR(mu.mean, 0.5, 4 * mu.stderr_);
  EXPECT_NEAR(mz.mean, 0, 4 * mz.stderr_);
  EXPECT_NEAR(mz2.mean, 1, 4 * mz2.stderr_);
  for (int i = 0; i < 1000; ++i) {
    auto k = s.uniform_int(-2, 3);
    ASSERT_GE(k, -2);
    ASSERT_LE(k, 3);
  }
}

TEST(Summation, PairwiseAndDegenerateSamples) {
  std::vector<double> x(1000, 0.1);
  auto e = mean_estimate(x);
  EXPECT_EQ(e.mean, 0.1);
  EXPECT_EQ(e.stderr_, 0);
  EXPECT_EQ(mean_estimate({1, 3}).mean, 2);
  EXPECT_DOUBLE_EQ(mean_estimate({1, 3}).stderr_, 1);
  EXPECT_EQ(mean_estimate({}).n, 0u);
}
