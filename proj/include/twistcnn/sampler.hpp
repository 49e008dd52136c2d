#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "twistcnn/curve_arith.hpp"

namespace twistcnn::sampler {

/// Counter-based generator: output i of stream s under key k is a fixed function of (k, s, i),
/// so sub-streams can be handed to workers without changing the numbers they produce.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key, std::uint64_t stream = 0) : key_(key), stream_(stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

  CounterRng split(std::uint64_t stream) const { return CounterRng(key_ ^ mix(stream_ + 1), stream); }

  std::uint64_t key() const { return key_; }
  std::uint64_t stream() const { return stream_; }
  std::uint64_t counter() const { return counter_; }
  void set_counter(std::uint64_t c) { counter_ = c; }

  static std::uint64_t mix(std::uint64_t x);

 private:
  std::uint64_t key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

inline constexpr std::uint64_t max_proposals = 1'000'000;

/// The acceptance rule of the semicircle rejection sampler: y < (2/pi) sin^2(theta).
bool accepts(double theta, double y);

struct ThetaDraw {
  double theta;
  std::uint64_t proposals;
};

/// theta ~ (2/pi) sin^2(theta) on [0, pi] by rejection from the box [0, pi] x [0, 2/pi].
ThetaDraw sample_theta(CounterRng& rng);

struct TraceSample {
  double tilde;       // cos(theta) in [-1, 1]
  std::int64_t value; // nearest integer to 2 tilde sqrt(p), ties away from zero
};

TraceSample trace_from_theta(double theta, std::int64_t p);
TraceSample sample_trace(CounterRng& rng, std::int64_t p);

struct RandomTraceVector {
  std::vector<std::int64_t> primes;
  std::vector<double> tilde_values;
  std::vector<std::int64_t> int_values;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;

  std::string origin() const;
  arith::TraceVector as_trace_vector() const;
};

struct RandomDatasetStats {
  std::uint64_t proposals = 0;
  std::uint64_t accepted = 0;
  std::uint64_t hasse_exceedances = 0;  // x_p^2 > 4p, clamped at normalisation
};

struct RandomDataset {
  std::vector<RandomTraceVector> vectors;
  RandomDatasetStats stats;
  std::uint64_t seed = 0;
  std::size_t n = 0;
};

/// `count` vectors of length n; vector i draws from sub-stream i of the seed, so any thread
/// count gives the same dataset.
RandomDataset random_dataset(std::size_t count, std::size_t n, std::uint64_t seed, unsigned threads = 1,
                             std::uint64_t first_index = 0);

/// JSON manifest: seed, count, N, proposal/acceptance counts, clamp statistics.
void write_manifest(std::ostream& out, const RandomDataset& ds);

/// Semicircle CDF F(x) = 1/2 + (x sqrt(1-x^2) + asin x) / pi.
double semicircle_cdf(double x);

}  // namespace twistcnn::sampler
