#include <gtest/gtest.h>

#include <complex>
#include <numeric>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "twistcnn/characters.hpp"

using namespace twistcnn::chars;

namespace {

// Conductor straight from the definition: least q | M with chi(n + kq) = chi(n) whenever both
// arguments are coprime to M.
std::int64_t brute_conductor(const DirichletCharacter& chi) {
  const std::int64_t m = chi.modulus();
  for (std::int64_t q = 1; q <= m; ++q) {
    if (m % q) continue;
    bool ok = true;
    for (std::int64_t n = 1; n <= m && ok; ++n) {
      if (std::gcd(n, m) != 1) continue;
      for (std::int64_t k = 1; k * q <= m && ok; ++k) {
        std::int64_t n2 = n + k * q;
        if (std::gcd(n2, m) != 1) continue;
        ok = chi.evaluate(n) == chi.evaluate(n2);
      }
    }
    if (ok) return q;
  }
  return m;
}

}  // namespace

TEST(UnitGroup, Generators) {
  EXPECT_TRUE(unit_group_generators(1).empty());
  EXPECT_TRUE(unit_group_generators(2).empty());
  auto g8 = unit_group_generators(8);
  ASSERT_EQ(g8.size(), 2u);
  EXPECT_EQ(g8[0].value, 7);
  EXPECT_EQ(g8[0].order, 2);
  EXPECT_EQ(g8[1].value, 5);
  EXPECT_EQ(g8[1].order, 2);
  auto g9 = unit_group_generators(9);
  ASSERT_EQ(g9.size(), 1u);
  EXPECT_EQ(g9[0].value, 2);
  EXPECT_EQ(g9[0].order, 6);
  EXPECT_THROW(unit_group_generators(0), std::invalid_argument);
  for (std::int64_t m = 1; m <= 200; ++m) {
    std::int64_t prod = 1;
    for (const auto& g : unit_group_generators(m)) prod *= g.order;
    EXPECT_EQ(prod, oracle::euler_phi(m)) << m;
  }
}

TEST(UnitGroup, DiscreteLogReconstructs) {
  for (std::int64_t m : {12, 15, 16, 40, 63, 97, 100}) {
    auto g = UnitGroup::get(m);
    for (std::int64_t n = 0; n < m; ++n) {
      auto l = g->discrete_log(n);
      ASSERT_EQ(l.has_value(), std::gcd(n, m) == 1);
      if (!l) continue;
      std::int64_t prod = 1 % m;
      for (std::size_t j = 0; j < l->size(); ++j)
        for (std::int64_t e = 0; e < (*l)[j]; ++e) prod = prod * g->generators()[j].value % m;
      EXPECT_EQ(prod, n % m);
    }
  }
}

TEST(Evaluate, Examples) {
  auto chi0 = DirichletCharacter::principal(10);
  EXPECT_EQ(chi0.value(3), std::complex<double>(1.0, 0.0));
  EXPECT_EQ(chi0.value(4), std::complex<double>(0.0, 0.0));
  DirichletCharacter chi3(3, {1});
  EXPECT_EQ(chi3.value(2), std::complex<double>(-1.0, 0.0));
  // mod 5 the generator is 2; exponent 1 of order 4 sends 2 -> i, and 3 = 2^3 -> -i.
  DirichletCharacter chi5(5, {1});
  EXPECT_EQ(chi5.value(2), std::complex<double>(0.0, 1.0));
  EXPECT_EQ(chi5.value(3), std::complex<double>(0.0, -1.0));
  EXPECT_EQ(chi5.value(8), chi5.value(3));  // periodic
  auto trivial = DirichletCharacter::principal(1);
  for (std::int64_t n : {-3, 0, 1, 2, 97}) EXPECT_EQ(trivial.value(n), std::complex<double>(1.0, 0.0));
  EXPECT_EQ(DirichletCharacter::principal(2).value(7), std::complex<double>(1.0, 0.0));
  EXPECT_EQ(DirichletCharacter::principal(2).value(4), std::complex<double>(0.0, 0.0));
}

TEST(Conductor, Examples) {
  EXPECT_EQ(DirichletCharacter::principal(6).conductor(), 1);
  // mod 6 = 2 * 3: the 3-component carries the quadratic character, the 2-component nothing.
  DirichletCharacter lifted(6, {1});
  EXPECT_EQ(lifted.conductor(), 3);
  EXPECT_FALSE(lifted.is_primitive());
  DirichletCharacter faithful9(9, {1});
  EXPECT_EQ(faithful9.conductor(), 9);
  EXPECT_TRUE(faithful9.is_primitive());
  EXPECT_FALSE(DirichletCharacter::principal(7).is_primitive());
  for (auto& chi : characters_mod(13))
    if (!chi.is_principal()) EXPECT_TRUE(chi.is_primitive());
}

TEST(Conductor, MatchesDefinitionForAllCharactersUpTo60) {
  for (std::int64_t m = 1; m <= 60; ++m)
    for (auto& chi : characters_mod(m)) EXPECT_EQ(chi.conductor(), brute_conductor(chi)) << "mod " << m;
}

TEST(Characters, PrimitiveCountsMatchMobiusFormula) {
  for (std::int64_t m = 1; m <= 100; ++m) {
    std::int64_t n = 0;
    for (auto& chi : characters_mod(m)) n += chi.is_primitive();
    EXPECT_EQ(n, oracle::primitive_count(m)) << "mod " << m;
  }
  EXPECT_EQ(oracle::primitive_count(8), 2);
  EXPECT_EQ(oracle::primitive_count(9), 4);
}

TEST(Characters, Orthogonality) {
  for (std::int64_t m = 2; m <= 53; ++m)
    for (auto& chi : characters_mod(m)) {
      if (chi.is_principal()) continue;
      std::complex<double> s = 0;
      for (std::int64_t a = 1; a <= m; ++a) s += chi.value(a);
      EXPECT_LT(std::abs(s), 1e-9) << "mod " << m;
    }
}

TEST(Characters, MultiplicativityFuzz) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::int64_t> mod_d(1, 120), arg(-1000, 1000);
  for (int i = 0; i < 10000; ++i) {
    std::int64_t m = mod_d(rng);
    auto gens = unit_group_generators(m);
    std::vector<std::int64_t> e;
    for (auto& g : gens) e.push_back(std::uniform_int_distribution<std::int64_t>(0, g.order - 1)(rng));
    DirichletCharacter chi(m, e);
    std::int64_t a = arg(rng), b = arg(rng);
    auto ab = chi.evaluate(a * b), ea = chi.evaluate(a), eb = chi.evaluate(b);
    if (!ea || !eb) {
      EXPECT_FALSE(ab.has_value());
    } else {
      ASSERT_TRUE(ab.has_value());
      EXPECT_EQ(*ab, *ea * *eb);
    }
  }
}

TEST(Characters, RealCharactersTakeRealValues) {
  for (std::int64_t m = 1; m <= 60; ++m)
    for (auto& chi : characters_mod(m)) {
      bool real_valued = true;
      for (std::int64_t n = 0; n < m; ++n) {
        auto v = chi.value(n);
        real_valued = real_valued && v.imag() == 0.0 && (v.real() == 0.0 || std::abs(v.real()) == 1.0);
      }
      EXPECT_EQ(real_valued, chi.is_real()) << "mod " << m;
    }
}

TEST(EnumeratePrimitive, OrderAndDeterminism) {
  auto one = enumerate_primitive(1);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].modulus(), 1);
  auto a = enumerate_primitive(300), b = enumerate_primitive(300);
  ASSERT_EQ(a.size(), 300u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].modulus(), b[i].modulus());
    EXPECT_EQ(a[i].exponents(), b[i].exponents());
    EXPECT_TRUE(a[i].is_primitive());
    if (i > 0) {
      EXPECT_LE(a[i - 1].modulus(), a[i].modulus());
      if (a[i - 1].modulus() == a[i].modulus()) EXPECT_LT(a[i - 1].exponents(), a[i].exponents());
    }
  }
  std::size_t mod8 = 0, mod9 = 0;
  for (auto& c : a) {
    mod8 += c.modulus() == 8;
    mod9 += c.modulus() == 9;
  }
  EXPECT_EQ(mod8, 2u);
  EXPECT_EQ(mod9, 4u);
  // index 1 is the quadratic character mod 3, index 2 the one mod 4
  EXPECT_EQ(a[1].modulus(), 3);
  EXPECT_EQ(a[2].modulus(), 4);
}

TEST(EnumeratePrimitive, CsvExport) {
  std::ostringstream out;
  write_characters_csv(out, enumerate_primitive(3));
  EXPECT_EQ(out.str(), "index,modulus,conductor,exponents,is_real\n0,1,1,,1\n1,3,3,1,1\n2,4,4,1,1\n");
}
