#include "twistcnn/primes.hpp"

#include <cmath>
#include <stdexcept>

namespace twistcnn {

std::vector<std::int64_t> primes_below(std::int64_t bound) {
  std::vector<std::int64_t> out;
  if (bound <= 2) return out;
  std::vector<bool> composite(static_cast<std::size_t>(bound), false);
  for (std::int64_t i = 2; i < bound; ++i) {
    if (composite[static_cast<std::size_t>(i)]) continue;
    out.push_back(i);
    for (std::int64_t j = i * i; j < bound; j += i) composite[static_cast<std::size_t>(j)] = true;
  }
  return out;
}

std::vector<std::int64_t> first_primes(std::size_t count) {
  if (count == 0) return {};
  // p_n < n (ln n + ln ln n) for n >= 6
  double n = static_cast<double>(count);
  std::int64_t bound = count < 6 ? 15 : static_cast<std::int64_t>(n * (std::log(n) + std::log(std::log(n)))) + 1;
  auto primes = primes_below(bound);
  primes.resize(count);
  return primes;
}

bool is_prime(std::int64_t n) {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  for (std::int64_t d = 3; d * d <= n; d += 2)
    if (n % d == 0) return false;
  return true;
}

std::vector<std::int64_t> prime_divisors(std::int64_t n) {
  if (n == 0) throw std::invalid_argument("prime_divisors: zero has no finite factorisation");
  if (n < 0) n = -n;
  std::vector<std::int64_t> out;
  for (std::int64_t d = 2; d * d <= n; ++d) {
    if (n % d != 0) continue;
    out.push_back(d);
    while (n % d == 0) n /= d;
  }
  if (n > 1) out.push_back(n);
  return out;
}

}  // namespace twistcnn
