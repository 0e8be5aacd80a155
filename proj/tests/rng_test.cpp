#include "drbandit/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

namespace drbandit {
namespace {

TEST(RngStream, DeterministicGivenSeed) {
  RngStream a(42, 3, StreamPurpose::contexts);
  RngStream b(42, 3, StreamPurpose::contexts);
  for (int i = 0; i < 100; ++i) {
    ASSERT_EQ(a.next_u64(), b.next_u64());
  }
}

TEST(RngStream, PurposeAndReplicationSeparateStreams) {
  RngStream a(42, 3, StreamPurpose::contexts);
  RngStream b(42, 3, StreamPurpose::rewards);
  RngStream c(42, 4, StreamPurpose::contexts);
  int equal_ab = 0;
  int equal_ac = 0;
  for (int i = 0; i < 64; ++i) {
    const auto va = a.next_u64();
    equal_ab += va == b.next_u64() ? 1 : 0;
    equal_ac += va == c.next_u64() ? 1 : 0;
  }
  EXPECT_LE(equal_ab, 1);
  EXPECT_LE(equal_ac, 1);
}

TEST(RngStream, Uniform01OpenInterval) {
  RngStream rng(7);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform01();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(RngStream, NormalMoments) {
  RngStream rng(11);
  const int n = 200000;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sum_sq += z * z;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  EXPECT_NEAR(mean, 0.0, 4.0 / std::sqrt(static_cast<double>(n)));
  EXPECT_NEAR(var, 1.0, 0.02);
}

TEST(RngStream, CategoricalFrequencies) {
  RngStream rng(13);
  const std::vector<double> probs = {0.5, 0.3, 0.2};
  std::vector<int> counts(3, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(rng.categorical(probs))];
  for (std::size_t k = 0; k < probs.size(); ++k) {
    EXPECT_NEAR(counts[k] / static_cast<double>(n), probs[k], 0.01);
  }
}

TEST(RngStream, UniformIntBounds) {
  RngStream rng(17);
  for (int i = 0; i < 1000; ++i) {
    const int v = rng.uniform_int(7);
    ASSERT_GE(v, 0);
    ASSERT_LT(v, 7);
  }
  EXPECT_THROW(rng.uniform_int(0), std::invalid_argument);
}

}  // namespace
}  // namespace drbandit
