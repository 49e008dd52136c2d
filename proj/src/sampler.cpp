#include "twistcnn/sampler.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "twistcnn/primes.hpp"

namespace twistcnn::sampler {

std::uint64_t CounterRng::mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

CounterRng::result_type CounterRng::operator()() {
  std::uint64_t base = mix(key_ ^ mix(stream_ * 0xD1B54A32D192ED03ULL));
  return mix(base + 0x9E3779B97F4A7C15ULL * ++counter_);
}

double CounterRng::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

std::uint64_t CounterRng::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("CounterRng::below: empty range");
  // Lemire-style rejection to remove modulo bias.
  std::uint64_t threshold = (0 - bound) % bound;
  while (true) {
    std::uint64_t r = (*this)();
    if (r >= threshold) return r % bound;
  }
}

bool accepts(double theta, double y) {
  double s = std::sin(theta);
  return y < 2.0 / std::numbers::pi * s * s;
}

ThetaDraw sample_theta(CounterRng& rng) {
  for (std::uint64_t k = 1; k <= max_proposals; ++k) {
    double theta = std::numbers::pi * rng.uniform();
    double y = 2.0 / std::numbers::pi * rng.uniform();
    if (accepts(theta, y)) return {theta, k};
  }
  throw std::runtime_error("sample_theta: no acceptance after " + std::to_string(max_proposals) + " proposals");
}

TraceSample trace_from_theta(double theta, std::int64_t p) {
  double tilde = std::cos(theta);
  return {tilde, static_cast<std::int64_t>(std::llround(2.0 * tilde * std::sqrt(static_cast<double>(p))))};
}

TraceSample sample_trace(CounterRng& rng, std::int64_t p) { return trace_from_theta(sample_theta(rng).theta, p); }

std::string RandomTraceVector::origin() const { return "seed:" + std::to_string(seed) + "/" + std::to_string(index); }

arith::TraceVector RandomTraceVector::as_trace_vector() const {
  return {primes, int_values, arith::TraceSource::random_seed, origin()};
}

RandomDataset random_dataset(std::size_t count, std::size_t n, std::uint64_t seed, unsigned threads,
                             std::uint64_t first_index) {
  RandomDataset ds;
  ds.seed = seed;
  ds.n = n;
  ds.vectors.resize(count);
  const auto primes = first_primes(n);
  const CounterRng root(seed);
  std::vector<RandomDatasetStats> partial(std::max(1u, threads));

  auto work = [&](unsigned t, unsigned stride) {
    auto& st = partial[t];
    for (std::size_t i = t; i < count; i += stride) {
      auto& v = ds.vectors[i];
      v.seed = seed;
      v.index = first_index + i;
      v.primes = primes;
      v.tilde_values.resize(n);
      v.int_values.resize(n);
      CounterRng rng = root.split(v.index);
      for (std::size_t j = 0; j < n; ++j) {
        auto draw = sample_theta(rng);
        auto s = trace_from_theta(draw.theta, primes[j]);
        v.tilde_values[j] = s.tilde;
        v.int_values[j] = s.value;
        st.proposals += draw.proposals;
        st.accepted += 1;
        if (!arith::within_hasse(s.value, primes[j])) st.hasse_exceedances += 1;
      }
    }
  };

  unsigned stride = static_cast<unsigned>(partial.size());
  if (stride == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < stride; ++t) pool.emplace_back(work, t, stride);
  }
  for (const auto& st : partial) {
    ds.stats.proposals += st.proposals;
    ds.stats.accepted += st.accepted;
    ds.stats.hasse_exceedances += st.hasse_exceedances;
  }
  return ds;
}

void write_manifest(std::ostream& out, const RandomDataset& ds) {
  nlohmann::ordered_json j;
  j["seed"] = ds.seed;
  j["count"] = ds.vectors.size();
  j["N"] = ds.n;
  j["proposals"] = ds.stats.proposals;
  j["accepted"] = ds.stats.accepted;
  j["acceptance_rate"] = ds.stats.proposals ? static_cast<double>(ds.stats.accepted) / ds.stats.proposals : 0.0;
  j["hasse_exceedances_clamped"] = ds.stats.hasse_exceedances;
  j["rounding"] = "nearest, ties away from zero";
  out << j.dump(2) << '\n';
}

double semicircle_cdf(double x) {
  if (x <= -1.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return 0.5 + (x * std::sqrt(1.0 - x * x) + std::asin(x)) / std::numbers::pi;
}

}  // namespace twistcnn::sampler
