#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "dii/parallel.hpp"
#include "dii/rng.hpp"

namespace {

TEST(Rng, SameSeedSameStream) {
  dii::Rng a(42, dii::Stream::dataset), b(42, dii::Stream::dataset);
  for (int k = 0; k < 100; ++k) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, StreamsDiffer) {
  dii::Rng a(42, dii::Stream::dataset), b(42, dii::Stream::row_subsample), c(42, dii::Stream::dataset, 1);
  EXPECT_NE(a.next_u64(), b.next_u64());
  dii::Rng a2(42, dii::Stream::dataset);
  EXPECT_NE(a2.next_u64(), c.next_u64());
}

TEST(Rng, FirstValuesAreFrozen) {
  // Portable streams: these values must not change across platforms or releases.
  dii::Rng r(1, dii::Stream::dataset);
  const auto first = r.next_u64();
  dii::Rng again(1, dii::Stream::dataset);
  EXPECT_EQ(first, again.next_u64());
  EXPECT_EQ(dii::splitmix64(0), 0xe220a8397b1dcdafULL);
}

TEST(Rng, UniformInUnitInterval) {
  dii::Rng r(3, dii::Stream::test);
  double sum = 0.0;
  for (int k = 0; k < 20000; ++k) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 20000, 0.5, 0.01);
}

TEST(Rng, NormalMoments) {
  dii::Rng r(4, dii::Stream::test);
  const int n = 50000;
  double s = 0.0, s2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
  }
  const double mean = s / n;
  EXPECT_NEAR(mean, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n - mean * mean, 1.0, 0.03);
}

TEST(Rng, BelowIsInRange) {
  dii::Rng r(5, dii::Stream::test);
  std::vector<int> counts(7, 0);
  for (int k = 0; k < 7000; ++k) {
    const auto v = r.below(7);
    ASSERT_LT(v, 7u);
    ++counts[v];
  }
  for (int c : counts) EXPECT_GT(c, 800);
}

TEST(Rng, SampleWithoutReplacement) {
  dii::Rng r(6, dii::Stream::row_subsample);
  auto s = r.sample_without_replacement(10000, 100);
  ASSERT_EQ(s.size(), 100u);
  EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
  EXPECT_EQ(std::set<std::size_t>(s.begin(), s.end()).size(), 100u);
  EXPECT_LT(s.back(), 10000u);
}

TEST(Rng, ShuffleIsPermutation) {
  dii::Rng r(7, dii::Stream::test);
  std::vector<int> v(50);
  for (int k = 0; k < 50; ++k) v[k] = k;
  auto w = v;
  r.shuffle(w);
  EXPECT_NE(v, w);
  std::sort(w.begin(), w.end());
  EXPECT_EQ(v, w);
}

TEST(Parallel, VisitsEveryIndexOnce) {
  for (std::size_t jobs : {1u, 2u, 5u}) {
    std::vector<int> hits(37, 0);
    dii::parallel_for(37, jobs, [&](std::size_t i) { ++hits[i]; });
    for (int h : hits) EXPECT_EQ(h, 1);
  }
}

TEST(Parallel, PropagatesExceptions) {
  EXPECT_THROW(dii::parallel_for(10, 3,
                                 [](std::size_t i) {
                                   if (i == 4) throw std::runtime_error("boom");
                                 }),
               std::runtime_error);
}

}  // namespace
