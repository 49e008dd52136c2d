#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "twistcnn/curve_arith.hpp"
#include "twistcnn/primes.hpp"

using namespace twistcnn;
using arith::WeierstrassCurve;

namespace {

WeierstrassCurve model(std::int64_t w1, std::int64_t w2, std::int64_t w3, std::int64_t w4, std::int64_t w6,
                       std::string label = "test", std::int64_t conductor = 1) {
  WeierstrassCurve c;
  c.w1 = w1, c.w2 = w2, c.w3 = w3, c.w4 = w4, c.w6 = w6;
  c.label = std::move(label);
  c.conductor = conductor;
  c.is_minimal = true;
  return c;
}

const WeierstrassCurve e11a3 = model(0, -1, 1, 0, 0, "11a3", 11);

// 1728 disc = c4^3 - c6^2, an independent route to the discriminant.
mpz_class disc_via_c4_c6(const WeierstrassCurve& c) {
  auto b = arith::b_invariants(c);
  mpz_class c4 = b.b2 * b.b2 - 24 * b.b4;
  mpz_class c6 = -b.b2 * b.b2 * b.b2 + 36 * b.b2 * b.b4 - 216 * b.b6;
  mpz_class num = c4 * c4 * c4 - c6 * c6;
  EXPECT_TRUE(mpz_divisible_ui_p(num.get_mpz_t(), 1728));
  return num / 1728;
}

}  // namespace

TEST(Primes, FirstPrimes) {
  auto p = first_primes(300);
  ASSERT_EQ(p.size(), 300u);
  EXPECT_EQ(p[0], 2);
  EXPECT_EQ(p[99], 541);
  EXPECT_EQ(p[299], 1987);
  EXPECT_TRUE(first_primes(0).empty());
  EXPECT_EQ(primes_below(1000).size(), 168u);
  EXPECT_EQ(prime_divisors(-360), (std::vector<std::int64_t>{2, 3, 5}));
}

TEST(Discriminant, Examples) {
  EXPECT_EQ(arith::discriminant(e11a3), -11);
  EXPECT_EQ(arith::discriminant(model(0, 0, 0, 0, 0)), 0);
  EXPECT_EQ(arith::discriminant(model(0, 0, 0, -1, 0)), 64);
}

TEST(Discriminant, AgreesWithC4C6Identity) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::int64_t> d(-1000, 1000);
  for (int i = 0; i < 500; ++i) {
    auto c = model(d(rng) % 2, d(rng) % 2, d(rng) % 2, d(rng), d(rng));
    EXPECT_EQ(arith::discriminant(c), disc_via_c4_c6(c));
  }
}

TEST(CountPoints, Examples) {
  EXPECT_EQ(arith::count_points(e11a3, 2), 5);
  EXPECT_EQ(arith::count_points(e11a3, 3), 5);
  EXPECT_EQ(arith::count_points(model(0, 0, 0, -1, 0), 3), 4);
  EXPECT_THROW(arith::count_points(e11a3, 11), std::domain_error);
}

TEST(ApGood, Examples) {
  EXPECT_EQ(arith::ap_good(e11a3, 2), -2);
  EXPECT_EQ(arith::ap_good(e11a3, 3), -1);
  EXPECT_EQ(arith::ap_good(e11a3, 5), 1);
  EXPECT_EQ(arith::ap_good(model(0, 0, 0, -1, 0), 3), 0);
}

TEST(ApBad, ReductionTypes) {
  EXPECT_EQ(arith::ap_bad(e11a3, 11), 1);                       // split multiplicative
  EXPECT_EQ(arith::ap_bad(model(0, 0, 0, 0, 3), 3), 0);          // cusp y^2 = x^3 mod 3
  EXPECT_EQ(arith::ap_bad(model(1, 0, 1, 4, -6, "14a1", 14), 2), -1);  // non-split
  EXPECT_EQ(arith::ap_bad(model(1, 0, 1, 4, -6, "14a1", 14), 7), 1);
  EXPECT_EQ(arith::ap_bad(model(1, 1, 1, -10, -10, "15a1", 15), 3), -1);
}

TEST(ApBad, Errors) {
  EXPECT_THROW(arith::ap_bad(e11a3, 5), std::domain_error);
  auto nonminimal = e11a3;
  nonminimal.is_minimal = false;
  EXPECT_THROW(arith::ap_bad(nonminimal, 11), std::domain_error);
}

TEST(NormalizedTrace, Examples) {
  EXPECT_DOUBLE_EQ(arith::normalized_trace(0, 5), 0.0);
  EXPECT_NEAR(arith::normalized_trace(-2, 2), -0.70710678118654752, 1e-15);
  EXPECT_NEAR(arith::normalized_trace(1, 11), 0.15075567228888181, 1e-15);
  EXPECT_THROW(arith::normalized_trace(3, 2), std::domain_error);
}

TEST(IsCm, Examples) {
  EXPECT_TRUE(arith::is_cm(model(0, 0, 0, 0, 1)));
  EXPECT_TRUE(arith::is_cm(model(0, 0, 0, -1, 0)));
  EXPECT_FALSE(arith::is_cm(e11a3));
  EXPECT_EQ(arith::j_invariant(e11a3), mpq_class(-4096, 11));
  // 27a1 has j = 0, 32a1 has j = 1728, 49a1 has j = -3375
  EXPECT_TRUE(arith::is_cm(model(0, 0, 1, 0, -7)));
  EXPECT_TRUE(arith::is_cm(model(0, 0, 0, 4, 0)));
  EXPECT_TRUE(arith::is_cm(model(1, -1, 0, -2, -1)));
  EXPECT_THROW(arith::is_cm(model(0, 0, 0, 0, 0)), std::domain_error);
}

TEST(TraceVector, Examples) {
  auto tv = arith::trace_vector(e11a3, 3);
  EXPECT_EQ(tv.values, (std::vector<std::int64_t>{-2, -1, 1}));
  EXPECT_EQ(tv.origin, "11a3");
  EXPECT_TRUE(arith::trace_vector(e11a3, 0).values.empty());
  auto long_tv = arith::trace_vector(e11a3, 100);
  for (std::size_t i = 0; i < 100; ++i) {
    std::int64_t p = long_tv.primes[i], ap = long_tv.values[i];
    EXPECT_LE(static_cast<double>(std::abs(ap)), 2.0 * std::sqrt(static_cast<double>(p)));
  }
  EXPECT_EQ(long_tv.values[4], 1);  // a_11
}

TEST(TraceVector, ParallelMatchesSequential) {
  std::vector<WeierstrassCurve> curves;
  for (int i = 0; i < 13; ++i) curves.push_back(model(1, 0, 1, 4 + i, -6 + 3 * i));
  auto seq = arith::trace_vectors(curves, 50, 1);
  auto par = arith::trace_vectors(curves, 50, 4);
  ASSERT_EQ(seq.size(), par.size());
  for (std::size_t i = 0; i < seq.size(); ++i) EXPECT_EQ(seq[i].values, par[i].values);
}

// Quadratic-root counting against the independent double loop over F_p^2.
TEST(CountPoints, RandomCurvesMatchBruteForce) {
  std::mt19937_64 rng(2024);
  auto primes = primes_below(1000);
  std::uniform_int_distribution<std::int64_t> coeff(-50, 50);
  std::uniform_int_distribution<std::size_t> pick(0, primes.size() - 1);
  int checked = 0;
  while (checked < 1000) {
    auto c = model(coeff(rng), coeff(rng), coeff(rng), coeff(rng), coeff(rng));
    if (arith::discriminant(c) == 0) continue;
    std::int64_t p = primes[pick(rng) % 60];  // keep the O(p^2) oracle cheap
    if (arith::divides_discriminant(c, p)) continue;
    EXPECT_EQ(arith::ap_good(c, p), oracle::brute_ap(c, p)) << "p=" << p;
    ++checked;
  }
}

TEST(CurveCsv, ParseAndErrors) {
  std::istringstream ok("label,conductor,rank,w1,w2,w3,w4,w6\n11a3,11,0,0,-1,1,0,0\n");
  auto curves = arith::parse_curves_csv(ok);
  ASSERT_EQ(curves.size(), 1u);
  EXPECT_EQ(curves[0].label, "11a3");
  EXPECT_TRUE(curves[0].is_minimal);
  EXPECT_TRUE(arith::conductor_consistent(curves[0]));

  std::istringstream bad_header("a,b\n");
  EXPECT_THROW(arith::parse_curves_csv(bad_header), std::runtime_error);
  std::istringstream singular("label,conductor,rank,w1,w2,w3,w4,w6\nx,1,0,0,0,0,0,0\n");
  EXPECT_THROW(arith::parse_curves_csv(singular), std::runtime_error);

  std::ostringstream out;
  arith::write_traces_csv(out, {arith::trace_vector(e11a3, 3)});
  EXPECT_EQ(out.str(), "label,2,3,5\n11a3,-2,-1,1\n");
}

TEST(Dataset, IngestedTableInvariants) {
  auto curves = arith::read_curves_csv(std::string(TWISTCNN_DATA_DIR) + "/cremona_conductor_le_3000.csv");
  ASSERT_GT(curves.size(), 17000u);
  std::size_t cm = 0;
  for (std::size_t i = 0; i < curves.size(); i += 7) {
    const auto& c = curves[i];
    ASSERT_TRUE(arith::conductor_consistent(c)) << c.label;
    for (std::int64_t p : prime_divisors(c.conductor)) {
      int ap = arith::ap_bad(c, p);
      bool additive = c.conductor % (p * p) == 0;
      EXPECT_EQ(ap == 0, additive) << c.label << " p=" << p;
    }
    if (arith::is_cm(c)) ++cm;
  }
  EXPECT_GT(cm, 0u);  // the raw table still contains CM curves; ingestion filters them
}
