#include "twistcnn/characters.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "twistcnn/primes.hpp"

namespace twistcnn::chars {
namespace {

std::int64_t mod(std::int64_t a, std::int64_t m) {
  std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

std::int64_t ipow(std::int64_t b, int e) {
  std::int64_t r = 1;
  while (e-- > 0) r *= b;
  return r;
}

std::int64_t powmod(std::int64_t b, std::int64_t e, std::int64_t m) {
  std::int64_t r = 1 % m;
  b = mod(b, m);
  while (e > 0) {
    if (e & 1) r = r * b % m;
    b = b * b % m;
    e >>= 1;
  }
  return r;
}

// Inverse of a mod m for coprime a, m.
std::int64_t inverse(std::int64_t a, std::int64_t m) {
  std::int64_t g = m, x = 0, x1 = 1, a1 = mod(a, m);
  while (a1 != 0) {
    std::int64_t q = g / a1;
    std::tie(g, a1) = std::make_pair(a1, g - q * a1);
    std::tie(x, x1) = std::make_pair(x1, x - q * x1);
  }
  return mod(x, m);
}

struct PrimePower {
  std::int64_t p;
  int k;
  std::int64_t pk;
};

std::vector<PrimePower> factor(std::int64_t m) {
  std::vector<PrimePower> out;
  for (std::int64_t p : prime_divisors(m)) {
    int k = 0;
    std::int64_t pk = 1;
    while (m % p == 0) {
      m /= p;
      ++k;
      pk *= p;
    }
    out.push_back({p, k, pk});
  }
  return out;
}

std::int64_t smallest_primitive_root(std::int64_t p, std::int64_t pk) {
  std::int64_t phi = pk / p * (p - 1);
  auto qs = prime_divisors(phi);
  for (std::int64_t g = 2; g < pk; ++g) {
    if (g % p == 0) continue;
    bool ok = true;
    for (std::int64_t q : qs)
      if (powmod(g, phi / q, pk) == 1) {
        ok = false;
        break;
      }
    if (ok) return g;
  }
  throw std::logic_error("no primitive root mod " + std::to_string(pk));
}

// Residue congruent to r mod pk and to 1 mod m / pk.
std::int64_t crt_lift(std::int64_t r, std::int64_t pk, std::int64_t m) {
  std::int64_t rest = m / pk;
  if (rest == 1) return mod(r, m);
  // x = 1 + rest * t with 1 + rest * t = r (mod pk)
  std::int64_t t = mod((r - 1) % pk * inverse(rest, pk), pk);
  return mod(1 + rest * t, m);
}

}  // namespace

RootOfUnity RootOfUnity::from_fraction(std::int64_t num, std::int64_t den) {
  if (den <= 0) throw std::invalid_argument("RootOfUnity: denominator must be positive");
  num = mod(num, den);
  std::int64_t g = std::gcd(num, den);
  if (g == 0) g = den;
  return {num / g, den / g};
}

RootOfUnity RootOfUnity::operator*(const RootOfUnity& o) const {
  std::int64_t l = std::lcm(den, o.den);
  return from_fraction(num * (l / den) + o.num * (l / o.den), l);
}

std::complex<double> RootOfUnity::to_complex() const {
  if (4 % den == 0) {
    switch (num * (4 / den)) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      case 2: return {-1.0, 0.0};
      case 3: return {0.0, -1.0};
    }
  }
  double angle = 2.0 * std::numbers::pi * static_cast<double>(num) / static_cast<double>(den);
  return {std::cos(angle), std::sin(angle)};
}

std::vector<Generator> unit_group_generators(std::int64_t modulus) {
  if (modulus <= 0) throw std::invalid_argument("unit_group_generators: modulus must be positive");
  std::vector<Generator> gens;
  if (modulus == 1) return gens;
  for (const auto& [p, k, pk] : factor(modulus)) {
    if (p == 2) {
      if (k == 1) continue;
      gens.push_back({crt_lift(pk - 1, pk, modulus), 2, 2});
      if (k >= 3) gens.push_back({crt_lift(5, pk, modulus), ipow(2, k - 2), 2});
    } else {
      gens.push_back({crt_lift(smallest_primitive_root(p, pk), pk, modulus), pk / p * (p - 1), p});
    }
  }
  return gens;
}

UnitGroup::UnitGroup(std::int64_t modulus) : modulus_(modulus), generators_(unit_group_generators(modulus)) {
  const std::size_t rank = generators_.size();
  for (const auto& g : generators_) order_ *= g.order;
  unit_.assign(static_cast<std::size_t>(modulus_), false);
  logs_.assign(static_cast<std::size_t>(modulus_) * rank, 0);
  // Walk all exponent tuples in mixed radix, tracking prod g_j^{l_j} incrementally.
  std::vector<std::int64_t> l(rank, 0);
  std::int64_t n = 1 % modulus_;
  for (std::int64_t step = 0; step < order_; ++step) {
    auto idx = static_cast<std::size_t>(n);
    if (unit_[idx]) throw std::logic_error("UnitGroup: generators are not independent mod " + std::to_string(modulus_));
    unit_[idx] = true;
    std::copy(l.begin(), l.end(), logs_.begin() + static_cast<std::ptrdiff_t>(idx * rank));
    for (std::size_t j = rank; j-- > 0;) {
      n = n * generators_[j].value % modulus_;
      if (++l[j] < generators_[j].order) break;
      l[j] = 0;  // g_j^{d_j} = 1, so n is already back in place for this coordinate
    }
  }
  if (modulus_ == 1) unit_[0] = true;
}

const std::int64_t* UnitGroup::log_row(std::int64_t n) const {
  static const std::int64_t no_generators = 0;
  auto idx = static_cast<std::size_t>(mod(n, modulus_));
  if (!unit_[idx]) return nullptr;
  if (generators_.empty()) return &no_generators;
  return logs_.data() + idx * generators_.size();
}

std::optional<std::vector<std::int64_t>> UnitGroup::discrete_log(std::int64_t n) const {
  const std::int64_t* row = log_row(n);
  if (row == nullptr) return std::nullopt;
  return std::vector<std::int64_t>(row, row + generators_.size());
}

std::shared_ptr<const UnitGroup> UnitGroup::get(std::int64_t modulus) {
  if (modulus <= 0) throw std::invalid_argument("UnitGroup: modulus must be positive");
  static std::mutex mutex;
  static std::map<std::int64_t, std::shared_ptr<const UnitGroup>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[modulus];
  if (!slot) slot = std::make_shared<const UnitGroup>(modulus);
  return slot;
}

DirichletCharacter::DirichletCharacter(std::int64_t modulus, std::vector<std::int64_t> exponents)
    : group_(UnitGroup::get(modulus)), exponents_(std::move(exponents)) {
  const auto& gens = group_->generators();
  if (exponents_.size() != gens.size())
    throw std::invalid_argument("DirichletCharacter: expected " + std::to_string(gens.size()) +
                                " exponents for modulus " + std::to_string(modulus));
  for (std::size_t j = 0; j < gens.size(); ++j)
    if (exponents_[j] < 0 || exponents_[j] >= gens[j].order)
      throw std::invalid_argument("DirichletCharacter: exponent out of range");
  conductor_ = compute_conductor();
}

DirichletCharacter DirichletCharacter::principal(std::int64_t modulus) {
  return DirichletCharacter(modulus, std::vector<std::int64_t>(unit_group_generators(modulus).size(), 0));
}

std::optional<RootOfUnity> DirichletCharacter::evaluate(std::int64_t n) const {
  const std::int64_t* row = group_->log_row(n);
  if (row == nullptr) return std::nullopt;
  const auto& gens = group_->generators();
  RootOfUnity r;
  for (std::size_t j = 0; j < gens.size(); ++j)
    r = r * RootOfUnity::from_fraction(exponents_[j] * row[j], gens[j].order);
  return r;
}

std::complex<double> DirichletCharacter::value(std::int64_t n) const {
  auto r = evaluate(n);
  return r ? r->to_complex() : std::complex<double>(0.0, 0.0);
}

bool DirichletCharacter::is_principal() const {
  for (auto e : exponents_)
    if (e != 0) return false;
  return true;
}

bool DirichletCharacter::is_real() const {
  const auto& gens = generators();
  for (std::size_t j = 0; j < gens.size(); ++j)
    if ((2 * exponents_[j]) % gens[j].order != 0) return false;
  return true;
}

std::int64_t DirichletCharacter::order() const {
  const auto& gens = generators();
  std::int64_t o = 1;
  for (std::size_t j = 0; j < gens.size(); ++j) o = std::lcm(o, gens[j].order / std::gcd(exponents_[j], gens[j].order));
  return o;
}

std::int64_t DirichletCharacter::compute_conductor() const {
  const std::int64_t m = modulus();
  const auto& gens = generators();
  std::int64_t cond = 1;
  for (const auto& [p, k, pk] : factor(m)) {
    std::vector<std::size_t> comp;
    std::int64_t denom = 1;
    for (std::size_t j = 0; j < gens.size(); ++j)
      if (gens[j].prime == p) {
        comp.push_back(j);
        denom = std::lcm(denom, gens[j].order);
      }
    // Smallest p^t such that the component character is trivial on units = 1 mod p^t.
    std::int64_t pt = 1;
    for (int t = 0; t <= k; ++t, pt *= p) {
      bool trivial = true;
      for (std::int64_t u = 1; u < m && trivial; ++u) {
        if (u % pt != 1 % pt) continue;
        const std::int64_t* row = group_->log_row(u);
        if (row == nullptr) continue;
        std::int64_t phase = 0;
        for (auto j : comp) phase += exponents_[j] * row[j] * (denom / gens[j].order);
        trivial = phase % denom == 0;
      }
      if (trivial) break;
    }
    cond *= pt;
  }
  return cond;
}

std::int64_t conductor_of(const DirichletCharacter& chi) { return chi.conductor(); }

bool is_primitive(const DirichletCharacter& chi) { return chi.is_primitive(); }

std::vector<DirichletCharacter> characters_mod(std::int64_t modulus) {
  const auto gens = unit_group_generators(modulus);
  std::vector<DirichletCharacter> out;
  std::vector<std::int64_t> e(gens.size(), 0);
  while (true) {
    out.emplace_back(modulus, e);
    std::size_t j = gens.size();
    while (j-- > 0) {
      if (++e[j] < gens[j].order) break;
      e[j] = 0;
    }
    if (j == static_cast<std::size_t>(-1)) break;
  }
  return out;
}

std::vector<DirichletCharacter> enumerate_primitive(std::size_t count) {
  std::vector<DirichletCharacter> out;
  for (std::int64_t q = 1; out.size() < count; ++q) {
    if (q % 4 == 2) continue;  // no primitive characters
    for (auto& chi : characters_mod(q)) {
      if (!chi.is_primitive()) continue;
      out.push_back(std::move(chi));
      if (out.size() == count) break;
    }
  }
  return out;
}

void write_characters_csv(std::ostream& out, const std::vector<DirichletCharacter>& chars) {
  out << "index,modulus,conductor,exponents,is_real\n";
  for (std::size_t i = 0; i < chars.size(); ++i) {
    const auto& c = chars[i];
    out << i << ',' << c.modulus() << ',' << c.conductor() << ',';
    for (std::size_t j = 0; j < c.exponents().size(); ++j) out << (j ? ";" : "") << c.exponents()[j];
    out << ',' << (c.is_real() ? 1 : 0) << '\n';
  }
}

}  // namespace twistcnn::chars
