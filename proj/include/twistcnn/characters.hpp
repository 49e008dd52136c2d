#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

namespace twistcnn::chars {

/// exp(2 pi i * num/den) with 0 <= num < den and gcd(num, den) = 1.
struct RootOfUnity {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static RootOfUnity from_fraction(std::int64_t num, std::int64_t den);
  RootOfUnity operator*(const RootOfUnity& other) const;
  bool operator==(const RootOfUnity&) const = default;

  /// Quarter turns map to exact values in {1, i, -1, -i}; other angles use cos/sin.
  std::complex<double> to_complex() const;
};

struct Generator {
  std::int64_t value;  // residue mod M
  std::int64_t order;
  std::int64_t prime;  // prime whose component this generator belongs to
};

/// (Z/M)^* as a product of cyclic groups with a discrete-log table over all residues.
class UnitGroup {
 public:
  explicit UnitGroup(std::int64_t modulus);

  std::int64_t modulus() const { return modulus_; }
  const std::vector<Generator>& generators() const { return generators_; }
  std::int64_t order() const { return order_; }

  /// Exponents (l_1, ..., l_r) with n = prod g_j^{l_j} mod M, or nullopt when gcd(n, M) > 1.
  std::optional<std::vector<std::int64_t>> discrete_log(std::int64_t n) const;

  /// Shared, lazily built group for a modulus. Safe to call concurrently.
  static std::shared_ptr<const UnitGroup> get(std::int64_t modulus);

 private:
  friend class DirichletCharacter;
  const std::int64_t* log_row(std::int64_t n) const;

  std::int64_t modulus_;
  std::int64_t order_ = 1;
  std::vector<Generator> generators_;
  std::vector<std::int64_t> logs_;  // modulus_ * rank entries
  std::vector<bool> unit_;
};

std::vector<Generator> unit_group_generators(std::int64_t modulus);

class DirichletCharacter {
 public:
  /// exponents[j] in [0, d_j) selects the character g_j -> exp(2 pi i e_j / d_j).
  DirichletCharacter(std::int64_t modulus, std::vector<std::int64_t> exponents);

  static DirichletCharacter principal(std::int64_t modulus);

  std::int64_t modulus() const { return group_->modulus(); }
  const std::vector<std::int64_t>& exponents() const { return exponents_; }
  const std::vector<Generator>& generators() const { return group_->generators(); }

  /// nullopt encodes the value 0 (gcd(n, M) > 1).
  std::optional<RootOfUnity> evaluate(std::int64_t n) const;
  std::complex<double> value(std::int64_t n) const;

  std::int64_t conductor() const { return conductor_; }
  bool is_primitive() const { return conductor_ == modulus(); }
  bool is_principal() const;
  /// chi^2 principal, i.e. chi takes values in {-1, 0, 1}.
  bool is_real() const;
  std::int64_t order() const;

 private:
  std::int64_t compute_conductor() const;

  std::shared_ptr<const UnitGroup> group_;
  std::vector<std::int64_t> exponents_;
  std::int64_t conductor_ = 1;
};

/// Smallest q | M with chi(n + kq) = chi(n) for all n, n + kq coprime to M.
std::int64_t conductor_of(const DirichletCharacter& chi);
bool is_primitive(const DirichletCharacter& chi);

/// All characters mod M with exponent tuples in lexicographic order.
std::vector<DirichletCharacter> characters_mod(std::int64_t modulus);

/// The first `count` primitive characters ordered by conductor, then exponent tuple; index 0 is
/// the trivial character mod 1.
std::vector<DirichletCharacter> enumerate_primitive(std::size_t count);

/// index,modulus,conductor,exponents,is_real
void write_characters_csv(std::ostream& out, const std::vector<DirichletCharacter>& chars);

}  // namespace twistcnn::chars
