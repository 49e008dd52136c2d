#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "twistcnn/primes.hpp"
#include "twistcnn/sampler.hpp"

using namespace twistcnn::sampler;

TEST(Sampler, AcceptanceRule) {
  EXPECT_TRUE(accepts(std::numbers::pi / 2, 0.0));
  EXPECT_FALSE(accepts(0.0, 1e-9));
  EXPECT_FALSE(accepts(0.0, 0.3));
}

TEST(Sampler, TraceFromTheta) {
  auto s = trace_from_theta(std::numbers::pi / 2, 7);
  EXPECT_NEAR(s.tilde, 0.0, 1e-15);
  EXPECT_EQ(s.value, 0);
  // 2 cos(theta) sqrt(p) = -2.5 exactly would round away from zero to -3
  EXPECT_EQ(trace_from_theta(std::numbers::pi, 4).value, -4);
}

TEST(Sampler, RngIsCounterBased) {
  CounterRng a(42), b(42);
  for (int i = 0; i < 5; ++i) a();
  b.set_counter(5);
  EXPECT_EQ(a(), b());
  CounterRng s1 = CounterRng(42).split(3), s2 = CounterRng(42).split(3), s3 = CounterRng(42).split(4);
  EXPECT_EQ(s1(), s2());
  EXPECT_NE(CounterRng(42).split(3)(), s3());
  for (int i = 0; i < 1000; ++i) {
    double u = a.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Sampler, StatisticsAt1e5) {
  CounterRng rng(20240601);
  const int n = 100000;
  std::uint64_t proposals = 0;
  double m1 = 0, m2 = 0, m4 = 0;
  std::vector<double> xs;
  xs.reserve(n);
  for (int i = 0; i < n; ++i) {
    auto d = sample_theta(rng);
    proposals += d.proposals;
    double x = std::cos(d.theta);
    xs.push_back(x);
    m1 += x, m2 += x * x, m4 += x * x * x * x;
  }
  double rate = static_cast<double>(n) / proposals;
  EXPECT_NEAR(rate, 0.5, 0.01);
  EXPECT_NEAR(m1 / n, 0.0, 0.01);
  EXPECT_NEAR(m2 / n, 0.25, 0.01);
  // Catalan moments: E[x^4] = 2/16; sd of x^4 under the semicircle is ~0.136, 3 sigma at 1e5 ~ 1.3e-3
  EXPECT_NEAR(m4 / n, 0.125, 0.002);
  std::sort(xs.begin(), xs.end());
  double ks = 0;
  for (int i = 0; i < n; ++i) {
    double f = semicircle_cdf(xs[i]);
    ks = std::max({ks, std::abs(f - static_cast<double>(i) / n), std::abs(f - static_cast<double>(i + 1) / n)});
  }
  EXPECT_LT(ks, 0.01);
}

TEST(Sampler, SemicircleCdf) {
  EXPECT_DOUBLE_EQ(semicircle_cdf(-1.0), 0.0);
  EXPECT_DOUBLE_EQ(semicircle_cdf(0.0), 0.5);
  EXPECT_DOUBLE_EQ(semicircle_cdf(1.0), 1.0);
  // central difference of the CDF recovers the density (2/pi) sqrt(1 - x^2)
  double h = 1e-6, x = 0.3;
  EXPECT_NEAR((semicircle_cdf(x + h) - semicircle_cdf(x - h)) / (2 * h), 2 / std::numbers::pi * std::sqrt(1 - x * x),
              1e-8);
}

TEST(RandomDataset, DeterministicAndThreadInvariant) {
  EXPECT_TRUE(random_dataset(0, 100, 1).vectors.empty());
  auto a = random_dataset(2, 100, 77), b = random_dataset(2, 100, 77);
  ASSERT_EQ(a.vectors.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(a.vectors[i].tilde_values, b.vectors[i].tilde_values);
    EXPECT_EQ(a.vectors[i].int_values, b.vectors[i].int_values);
  }
  auto seq = random_dataset(17, 30, 5, 1), par = random_dataset(17, 30, 5, 3);
  for (std::size_t i = 0; i < 17; ++i) EXPECT_EQ(seq.vectors[i].tilde_values, par.vectors[i].tilde_values);
  EXPECT_EQ(seq.stats.proposals, par.stats.proposals);
}

TEST(RandomDataset, HasseConsistency) {
  auto ds = random_dataset(200, 100, 11);
  std::uint64_t exceed = 0;
  for (const auto& v : ds.vectors)
    for (std::size_t j = 0; j < v.int_values.size(); ++j) {
      double bound = 2 * std::sqrt(static_cast<double>(v.primes[j]));
      ASSERT_LE(std::abs(static_cast<double>(v.int_values[j])), bound + 0.5);
      ASSERT_LE(std::abs(v.tilde_values[j]), 1.0);
      EXPECT_EQ(v.int_values[j], std::llround(2 * v.tilde_values[j] * std::sqrt(static_cast<double>(v.primes[j]))));
      exceed += !twistcnn::arith::within_hasse(v.int_values[j], v.primes[j]);
    }
  EXPECT_EQ(exceed, ds.stats.hasse_exceedances);
  auto tv = ds.vectors[3].as_trace_vector();
  EXPECT_EQ(tv.source, twistcnn::arith::TraceSource::random_seed);
  EXPECT_EQ(tv.origin, "seed:11/3");
  std::ostringstream m;
  write_manifest(m, ds);
  EXPECT_NE(m.str().find("\"hasse_exceedances_clamped\""), std::string::npos);
}
