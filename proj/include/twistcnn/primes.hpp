#pragma once

#include <cstdint>
#include <vector>

namespace twistcnn {

/// The first `count` primes in ascending order.
std::vector<std::int64_t> first_primes(std::size_t count);

/// All primes strictly below `bound`.
std::vector<std::int64_t> primes_below(std::int64_t bound);

bool is_prime(std::int64_t n);

/// Distinct prime divisors of |n| in ascending order (n != 0).
std::vector<std::int64_t> prime_divisors(std::int64_t n);

}  // namespace twistcnn
