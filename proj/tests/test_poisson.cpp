#include <cmath>
#include <functional>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "radpair/photon_stats.hpp"
#include "radpair/rng.hpp"
#include "chi_square.hpp"

using namespace radpair;
using radpair::test::chi_square_p;

namespace {

double poisson_pmf(long long k, double mean) {
  return static_cast<double>(std::exp(poisson_log_pmf(k, mean)));
}

} // namespace

TEST(RandomStream, UniformIsOpenInterval) {
  RandomStream rng(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(RandomStream, StreamsAreDeterministicAndDistinct) {
  RandomStream a(42, 0), b(42, 0), c(42, 1), d(43, 0);
  std::set<std::uint64_t> firsts;
  for (int i = 0; i < 5; ++i) {
    const auto x = a.engine()();
    EXPECT_EQ(x, b.engine()());
    firsts.insert(x);
  }
  EXPECT_NE(c.engine()(), RandomStream(42, 0).engine()());
  EXPECT_NE(d.engine()(), RandomStream(42, 0).engine()());
}

TEST(RandomStream, NormalMoments) {
  RandomStream rng(9);
  const int n = 400000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 5.0 * std::sqrt(2.0 / n));
}

TEST(PoissonSample, ZeroMeanAndValidation) {
  RandomStream rng(5);
  for (int i = 0; i < 100; ++i)
    EXPECT_EQ(poisson_sample(0.0, rng), 0u);
  EXPECT_THROW(poisson_sample(-1.0, rng), ValidationError);
  EXPECT_THROW(poisson_sample(std::nan(""), rng), ValidationError);
  EXPECT_THROW(poisson_sample(INFINITY, rng), ValidationError);
}

TEST(PoissonSample, MomentsAtMeanFour) {
  RandomStream rng(2024);
  const int n = 1000000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<double>(poisson_sample(4.0, rng));
    s += k;
    s2 += k * k;
  }
  const double mean = s / n;
  const double var = (s2 - n * mean * mean) / (n - 1);
  EXPECT_NEAR(mean, 4.0, 0.01);
  EXPECT_NEAR(var, 4.0, 0.05);
}

TEST(PoissonSample, PhotonScaleMeanStaysWithinSixSigma) {
  RandomStream rng(77);
  const double mean = 2.212e11;
  const double bound = 6.0 * std::sqrt(mean);
  const int n = 1000000;
  int outside = 0;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double k = static_cast<double>(poisson_sample(mean, rng));
    if (std::abs(k - mean) > bound)
      ++outside;
    s += k - mean;
  }
  EXPECT_LE(outside, 1); // >= 99.9999% inside
  EXPECT_NEAR(s / n, 0.0, 5.0 * std::sqrt(mean / n));
}

TEST(PoissonSample, GaussianRegimeMoments) {
  RandomStream rng(8);
  const double mean = 5e7;
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = static_cast<double>(poisson_sample(mean, rng)) - mean;
    s += d;
    s2 += d * d;
  }
  EXPECT_NEAR(s / n, 0.0, 5.0 * std::sqrt(mean / n));
  EXPECT_NEAR(s2 / n / mean, 1.0, 5.0 * std::sqrt(2.0 / n));
}

TEST(PoissonSample, DistributionMatchesPmfInEachRegime) {
  for (double mean : {0.7, 4.0, 29.5, 30.0, 45.0, 250.0, 9000.0}) {
    RandomStream rng(1234, static_cast<std::uint64_t>(mean * 10));
    const std::size_t draws = 1000000;
    std::map<long long, std::size_t> hist;
    for (std::size_t i = 0; i < draws; ++i)
      ++hist[static_cast<long long>(poisson_sample(mean, rng))];
    const auto width = static_cast<long long>(8.0 * std::sqrt(mean) + 10.0);
    const long long lo = std::max(0LL, static_cast<long long>(mean) - width);
    const long long hi = static_cast<long long>(mean) + width;
    const double p = chi_square_p(
        hist, draws, [&](long long k) { return poisson_pmf(k, mean); }, lo, hi);
    EXPECT_GT(p, 0.001) << "mean " << mean;
  }
}

TEST(PoissonSample, SampledDifferencesFollowSkellam) {
  const std::pair<double, double> cases[] = {{3.0, 2.0}, {40.0, 35.0}};
  for (const auto &[n1, n2] : cases) {
    RandomStream a(55, 0), b(55, 1);
    const std::size_t draws = 1000000;
    std::map<long long, std::size_t> hist;
    for (std::size_t i = 0; i < draws; ++i)
      ++hist[static_cast<long long>(poisson_sample(n1, a)) -
             static_cast<long long>(poisson_sample(n2, b))];
    const auto width = static_cast<long long>(8.0 * std::sqrt(n1 + n2) + 10.0);
    const auto mu = static_cast<long long>(n1 - n2);
    const double p = chi_square_p(
        hist, draws, [&](long long k) { return skellam_pmf(k, {n1, n2}); },
        mu - width, mu + width);
    EXPECT_GT(p, 0.001) << n1 << "," << n2;
  }
}

TEST(PoissonSample, DeterministicGivenSeed) {
  RandomStream a(99, 3), b(99, 3);
  for (double mean : {0.5, 12.0, 600.0, 3e9})
    for (int i = 0; i < 100; ++i)
      EXPECT_EQ(poisson_sample(mean, a), poisson_sample(mean, b));
}
