#include <gtest/gtest.h>

#include "attseq/rng.hpp"

using attseq::Rng;

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.bits(), b.bits());
}

TEST(Rng, ForkIsIndependentAndStable) {
  Rng a = Rng::fork(7, "captions", 3);
  Rng b = Rng::fork(7, "captions", 3);
  Rng c = Rng::fork(7, "captions", 4);
  Rng d = Rng::fork(7, "scenes", 3);
  EXPECT_EQ(a.bits(), b.bits());
  Rng a2 = Rng::fork(7, "captions", 3);
  EXPECT_NE(a2.bits(), c.bits());
  EXPECT_NE(Rng::fork(7, "captions", 3).bits(), d.bits());
}

TEST(Rng, UniformRange) {
  Rng r(1);
  for (int i = 0; i < 10000; ++i) {
    double x = r.uniform();
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
  }
}

TEST(Rng, UniformIntBounds) {
  Rng r(2);
  int seen[5] = {0, 0, 0, 0, 0};
  for (int i = 0; i < 5000; ++i) {
    auto v = r.uniform_int(0, 4);
    ASSERT_GE(v, 0);
    ASSERT_LE(v, 4);
    seen[v]++;
  }
  for (int k = 0; k < 5; ++k) EXPECT_GT(seen[k], 0);
  EXPECT_EQ(r.uniform_int(3, 3), 3);
}

TEST(Rng, NormalMoments) {
  Rng r(3);
  double sum = 0, sq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double x = r.normal();
    sum += x;
    sq += x * x;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.02);
  EXPECT_NEAR(sq / n, 1.0, 0.03);
}

TEST(Rng, ShuffleDeterministic) {
  std::vector<int> v1{1, 2, 3, 4, 5, 6, 7, 8}, v2 = v1;
  Rng a(9), b(9);
  a.shuffle(v1);
  b.shuffle(v2);
  EXPECT_EQ(v1, v2);
}
