#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "jt/sopp.hpp"

namespace jt {
namespace {

FiniteDist random_sopp(std::size_t N, Rng& rng) {
  std::vector<double> w(2 * N, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    if (rng.below(4) == 0) continue;  // leave some pairs empty
    w[2 * i + (rng.coin() ? 1 : 0)] = rng.uniform() + 1e-3;
  }
  w[0] += w[1] == 0.0 ? 1e-3 : 0.0;
  return FiniteDist(w);
}

TEST(SoppDistance, Examples) {
  EXPECT_EQ(sopp_distance(FiniteDist({0.3, 0.0, 0.7, 0.0})), 0.0);
  for (std::size_t N : {1U, 2U, 5U, 64U}) EXPECT_NEAR(sopp_distance(FiniteDist::uniform(2 * N)), 0.5, 1e-12);
  EXPECT_NEAR(sopp_distance(FiniteDist({0.1, 0.4, 0.2, 0.3})), 0.3, 1e-15);
  EXPECT_THROW(sopp_distance(FiniteDist::uniform(3)), InvalidArgument);
}

// Nearest SOPP by construction: zero the smaller mass of every pair, move
// it onto the larger one, measure TV directly.
double zeroing_oracle(const FiniteDist& p) {
  std::vector<double> q(p.size(), 0.0);
  for (std::size_t i = 0; i < p.size() / 2; ++i) {
    const std::size_t keep = p[2 * i] >= p[2 * i + 1] ? 2 * i : 2 * i + 1;
    q[keep] = p[2 * i] + p[2 * i + 1];
  }
  double tv = 0;
  for (std::size_t j = 0; j < p.size(); ++j) tv += std::abs(p[j] - q[j]);
  return tv / 2;
}

TEST(SoppDistance, MatchesZeroingOracleAndPredicate) {
  Rng rng(1);
  for (int t = 0; t < 300; ++t) {
    const std::size_t N = 1 + rng.below(4);
    std::vector<double> w(2 * N);
    for (auto& x : w) x = rng.coin() ? rng.uniform() : 0.0;
    w[0] += 0.01;
    const FiniteDist p(w);
    ASSERT_NEAR(sopp_distance(p), zeroing_oracle(p), 1e-9);
    ASSERT_EQ(sopp_distance(p) == 0.0, is_sopp(p));
  }
  Rng rng2(2);
  for (int t = 0; t < 50; ++t) EXPECT_TRUE(is_sopp(random_sopp(8, rng2)));
}

TEST(SampleSize, Examples) {
  const double inv_e = std::exp(-1.0);
  EXPECT_EQ(sopp_sample_size(1, 1.0, inv_e), 38U);
  EXPECT_EQ(sopp_sample_size(1, 0.5, inv_e), 76U);
  EXPECT_THROW(sopp_sample_size(1, 1.0, 1.0), InvalidArgument);
  EXPECT_THROW(sopp_sample_size(1, 1.0, 0.0), InvalidArgument);
  EXPECT_THROW(sopp_sample_size(1, 0.0, 0.5), InvalidArgument);
  EXPECT_THROW(sopp_sample_size(1, 1.5, 0.5), InvalidArgument);
  EXPECT_THROW(sopp_sample_size(0, 0.5, 0.5), InvalidArgument);
}

TEST(SampleSize, DirectFormula) {
  for (double N : {1.0, 7.0, 64.0, 4096.0}) {
    for (double eps : {0.05, 0.25, 1.0}) {
      for (double delta : {0.01, 0.1, 0.5}) {
        const double L = std::log(1.0 / delta);
        const double m = (std::sqrt(32 * N * L) + 32 * L) / eps;
        const auto got = static_cast<double>(sopp_sample_size(N, eps, delta));
        ASSERT_GE(got, m);
        ASSERT_LT(got, m + 1);
      }
    }
  }
}

TEST(SoppTest, AcceptsSoppSources) {
  Rng rng(3);
  for (int t = 0; t < 500; ++t) {
    const FiniteDist p = random_sopp(1 + rng.below(32), rng);
    const auto v = sopp_test(p, 0.1, 0.05, rng);
    ASSERT_TRUE(v.accepted());
    ASSERT_EQ(v.samples_used, 2 * sopp_sample_size(static_cast<double>(p.size() / 2), 0.1, 0.05));
  }
}

TEST(SoppTest, InjectedCollisionRejectsWithWitness) {
  // 1-based values 1 and 2 form pair 1, i.e. 0-based elements 0, 1 of pair 0.
  const std::vector<std::size_t> sample{4, 0, 7, 1, 3};
  const auto v = sopp_scan(sample, 4);
  ASSERT_FALSE(v.accepted());
  EXPECT_EQ(v.witness, 0U);
  EXPECT_EQ(v.samples_used, 4U);

  std::size_t i = 0;
  const auto w = sopp_test_with([&] { return sample[i++]; }, 4, 3);
  EXPECT_EQ(w.witness, 0U);
  EXPECT_EQ(w.samples_used, 4U);
}

TEST(SoppTest, WitnessElementsAppearInSample) {
  Rng rng(4);
  for (int t = 0; t < 300; ++t) {
    const std::size_t N = 1 + rng.below(16);
    std::vector<std::size_t> drawn;
    const auto v = sopp_test_with(
        [&] {
          drawn.push_back(rng.below(2 * N));
          return drawn.back();
        },
        N, 8);
    ASSERT_EQ(v.samples_used, drawn.size());
    if (v.accepted()) continue;
    const std::size_t i = *v.witness;
    ASSERT_NE(std::find(drawn.begin(), drawn.end(), 2 * i), drawn.end());
    ASSERT_NE(std::find(drawn.begin(), drawn.end(), 2 * i + 1), drawn.end());
  }
}

TEST(SoppTest, UniformIsRejected) {
  const FiniteDist u = FiniteDist::uniform(128);
  Rng rng(5);
  int rejects = 0;
  for (int t = 0; t < 2000; ++t) rejects += sopp_test(u, 0.25, 0.05, rng).accepted() ? 0 : 1;
  EXPECT_GE(rejects, 1900);
}

TEST(SoppTest, SamplerOutOfRangeIsAnError) {
  EXPECT_THROW(sopp_test_with([] { return std::size_t{10}; }, 2, 4), InvalidArgument);
}

}  // namespace
}  // namespace jt
