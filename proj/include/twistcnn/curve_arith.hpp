#pragma once

#include <gmpxx.h>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace twistcnn::arith {

/// Integral Weierstrass model y^2 + w1 xy + w3 y = x^3 + w2 x^2 + w4 x + w6 plus the
/// metadata carried over from the curve table it was read from.
struct WeierstrassCurve {
  std::int64_t w1 = 0, w2 = 0, w3 = 0, w4 = 0, w6 = 0;
  std::string label;
  std::int64_t conductor = 1;
  int rank = 0;
  bool is_minimal = false;
};

struct BInvariants {
  mpz_class b2, b4, b6, b8;
};

enum class TraceSource { curve_label, random_seed };

/// (a_{p_1}, ..., a_{p_N}) for the first N primes, or a random-matrix surrogate of the same shape.
struct TraceVector {
  std::vector<std::int64_t> primes;
  std::vector<std::int64_t> values;
  TraceSource source = TraceSource::curve_label;
  std::string origin;  // curve label or "seed:<seed>/<index>"
};

BInvariants b_invariants(const WeierstrassCurve& curve);
mpz_class discriminant(const WeierstrassCurve& curve);
mpz_class c4(const WeierstrassCurve& curve);

/// Exact j-invariant c4^3 / disc. Throws std::domain_error for singular models.
mpq_class j_invariant(const WeierstrassCurve& curve);

/// True iff the j-invariant is one of the 13 rational CM j-invariants.
bool is_cm(const WeierstrassCurve& curve);

/// #E(F_p) including the point at infinity. Throws std::domain_error when p divides the discriminant.
std::int64_t count_points(const WeierstrassCurve& curve, std::int64_t p);

/// Number of affine solutions of the reduced equation mod p, singular point included.
std::int64_t affine_point_count(const WeierstrassCurve& curve, std::int64_t p);

std::int64_t ap_good(const WeierstrassCurve& curve, std::int64_t p);

/// a_p = p - #E_ns(F_p) at a prime of bad reduction of a minimal model: 1 split multiplicative,
/// -1 non-split multiplicative, 0 additive.
int ap_bad(const WeierstrassCurve& curve, std::int64_t p);

bool divides_discriminant(const WeierstrassCurve& curve, std::int64_t p);

/// a_p at any prime, dispatching on reduction type.
std::int64_t frobenius_trace(const WeierstrassCurve& curve, std::int64_t p);

/// a_p / (2 sqrt p). Throws std::domain_error when |a_p| > 2 sqrt p.
double normalized_trace(std::int64_t ap, std::int64_t p);

/// True when a_p^2 <= 4p, the integer form of the Hasse bound.
inline bool within_hasse(std::int64_t ap, std::int64_t p) { return ap * ap <= 4 * p; }

TraceVector trace_vector(const WeierstrassCurve& curve, std::size_t n);

/// Trace vectors for a batch of curves. Work is split over `threads` workers; the output is
/// identical to the sequential loop for any thread count.
std::vector<TraceVector> trace_vectors(const std::vector<WeierstrassCurve>& curves, std::size_t n,
                                       unsigned threads = 1);

/// Primes dividing the discriminant are exactly the primes dividing the conductor.
bool conductor_consistent(const WeierstrassCurve& curve);

/// Reads the curve table (header: label,conductor,rank,w1,w2,w3,w4,w6). Rows are taken as
/// minimal models.
std::vector<WeierstrassCurve> read_curves_csv(const std::string& path);
std::vector<WeierstrassCurve> parse_curves_csv(std::istream& in);
void write_curves_csv(std::ostream& out, const std::vector<WeierstrassCurve>& curves);

/// label followed by one column per prime.
void write_traces_csv(std::ostream& out, const std::vector<TraceVector>& traces);

}  // namespace twistcnn::arith
