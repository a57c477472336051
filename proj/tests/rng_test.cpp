#include "cbandits/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace cbandits;

TEST(Rng, DeterministicForSeed) {
  RandomStream a(42), b(42);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, SplitStreamsDiffer) {
  RandomStream parent(42);
  RandomStream child = parent.split();
  int collisions = 0;
  for (int i = 0; i < 1000; ++i)
    if (parent.next_u64() == child.next_u64()) ++collisions;
  EXPECT_EQ(collisions, 0);
}

TEST(Rng, DeriveStreamIsOrderSensitiveAndStable) {
  RandomStream a = derive_stream(7, {1, 2});
  RandomStream b = derive_stream(7, {2, 1});
  RandomStream c = derive_stream(7, {1, 2});
  EXPECT_NE(a.next_u64(), b.next_u64());
  RandomStream a2 = derive_stream(7, {1, 2});
  EXPECT_EQ(a2.next_u64(), c.next_u64());
}

TEST(Rng, UniformMoments) {
  RandomStream rng(1);
  double sum = 0, sumsq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sumsq += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.005);
  EXPECT_NEAR(sumsq / n - 0.25, 1.0 / 12.0, 0.005);
}

TEST(Rng, BelowIsInRangeAndRoughlyUniform) {
  RandomStream rng(3);
  std::vector<int> counts(9, 0);
  for (int i = 0; i < 90000; ++i) ++counts[rng.below(9)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(Rng, BetaMomentsMatch) {
  // Beta(3,5): mean 3/8, var 3*5/(8^2*9)
  RandomStream rng(11);
  double sum = 0, sumsq = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double x = rng.beta(3, 5);
    sum += x;
    sumsq += x * x;
  }
  double mean = sum / n;
  double var = sumsq / n - mean * mean;
  EXPECT_NEAR(mean, 3.0 / 8.0, 0.003);
  EXPECT_NEAR(var, 15.0 / (64.0 * 9.0), 0.002);
}

TEST(Rng, BetaWithSmallShape) {
  RandomStream rng(12);
  double sum = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double x = rng.beta(0.5, 0.5);
    ASSERT_TRUE(x >= 0.0 && x <= 1.0);
    sum += x;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.005);
}

TEST(Rng, DirichletSumsToOneWithRightMeans) {
  RandomStream rng(13);
  std::vector<double> alpha = {1.5, 0.5, 3.0};
  std::vector<double> mean(3, 0.0);
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    auto x = rng.dirichlet(alpha);
    double s = x[0] + x[1] + x[2];
    ASSERT_NEAR(s, 1.0, 1e-12);
    for (int k = 0; k < 3; ++k) mean[k] += x[k];
  }
  EXPECT_NEAR(mean[0] / n, 1.5 / 5.0, 0.005);
  EXPECT_NEAR(mean[1] / n, 0.5 / 5.0, 0.005);
  EXPECT_NEAR(mean[2] / n, 3.0 / 5.0, 0.005);
}
