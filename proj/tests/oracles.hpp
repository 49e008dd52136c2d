// Independent reference computations used only by the tests.
#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "twistcnn/curve_arith.hpp"

namespace oracle {

inline std::int64_t md(std::int64_t a, std::int64_t p) { return ((a % p) + p) % p; }

/// Affine solutions of the Weierstrass equation mod p by the full (x, y) double loop.
inline std::int64_t brute_affine_points(const twistcnn::arith::WeierstrassCurve& c, std::int64_t p) {
  std::int64_t n = 0;
  for (std::int64_t x = 0; x < p; ++x)
    for (std::int64_t y = 0; y < p; ++y) {
      std::int64_t lhs = md(y * y + md(c.w1, p) * x % p * y + md(c.w3, p) * y, p);
      std::int64_t rhs = md(x * x % p * x + md(c.w2, p) * x % p * x + md(c.w4, p) * x + md(c.w6, p), p);
      if (lhs == rhs) ++n;
    }
  return n;
}

/// Affine singular points: both partial derivatives vanish on the curve.
inline std::int64_t brute_singular_points(const twistcnn::arith::WeierstrassCurve& c, std::int64_t p) {
  std::int64_t n = 0;
  for (std::int64_t x = 0; x < p; ++x)
    for (std::int64_t y = 0; y < p; ++y) {
      std::int64_t f = md(y * y + c.w1 % p * x * y + c.w3 % p * y - (x * x * x + c.w2 % p * x * x + c.w4 % p * x + c.w6 % p), p);
      std::int64_t fx = md(c.w1 % p * y - (3 * x * x + 2 * (c.w2 % p) * x + c.w4 % p), p);
      std::int64_t fy = md(2 * y + c.w1 % p * x + c.w3 % p, p);
      if (f == 0 && fx == 0 && fy == 0) ++n;
    }
  return n;
}

/// a_p from the double loop: p + 1 - #E(F_p) at good primes, p - #E_ns(F_p) at bad ones.
inline std::int64_t brute_ap(const twistcnn::arith::WeierstrassCurve& c, std::int64_t p) {
  std::int64_t affine = brute_affine_points(c, p);
  std::int64_t singular = brute_singular_points(c, p);
  if (singular == 0) return p + 1 - (affine + 1);
  return p - (affine - singular + 1);
}

inline std::int64_t euler_phi(std::int64_t n) {
  std::int64_t r = 0;
  for (std::int64_t k = 1; k <= n; ++k)
    if (std::gcd(k, n) == 1) ++r;
  return r;
}

inline int mobius(std::int64_t n) {
  int m = 1;
  for (std::int64_t d = 2; d * d <= n; ++d) {
    if (n % d) continue;
    n /= d;
    if (n % d == 0) return 0;
    m = -m;
  }
  if (n > 1) m = -m;
  return m;
}

/// Number of primitive characters mod m as sum_{d | m} mu(m/d) phi(d).
inline std::int64_t primitive_count(std::int64_t m) {
  std::int64_t s = 0;
  for (std::int64_t d = 1; d <= m; ++d)
    if (m % d == 0) s += mobius(m / d) * euler_phi(d);
  return s;
}

}  // namespace oracle
