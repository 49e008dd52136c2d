#include "twistcnn/curve_arith.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "twistcnn/primes.hpp"

namespace twistcnn::arith {
namespace {

std::int64_t mod(std::int64_t a, std::int64_t p) {
  std::int64_t r = a % p;
  return r < 0 ? r + p : r;
}

struct ReducedModel {
  std::int64_t w1, w2, w3, w4, w6;
};

ReducedModel reduce(const WeierstrassCurve& c, std::int64_t p) {
  return {mod(c.w1, p), mod(c.w2, p), mod(c.w3, p), mod(c.w4, p), mod(c.w6, p)};
}

const std::vector<mpq_class>& cm_j_invariants() {
  static const std::vector<mpq_class> js = [] {
    std::vector<mpq_class> v;
    for (const char* s : {"0", "1728", "-3375", "8000", "-32768", "54000", "287496", "-884736", "-12288000",
                          "16581375", "-884736000", "-147197952000", "-262537412640768000"})
      v.emplace_back(s);
    return v;
  }();
  return js;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    out.push_back(field);
  }
  return out;
}

}  // namespace

BInvariants b_invariants(const WeierstrassCurve& c) {
  mpz_class w1 = static_cast<long>(c.w1), w2 = static_cast<long>(c.w2), w3 = static_cast<long>(c.w3),
            w4 = static_cast<long>(c.w4), w6 = static_cast<long>(c.w6);
  BInvariants b;
  b.b2 = w1 * w1 + 4 * w2;
  b.b4 = 2 * w4 + w1 * w3;
  b.b6 = w3 * w3 + 4 * w6;
  b.b8 = w1 * w1 * w6 + 4 * w2 * w6 - w1 * w3 * w4 + w2 * w3 * w3 - w4 * w4;
  return b;
}

mpz_class discriminant(const WeierstrassCurve& c) {
  auto [b2, b4, b6, b8] = b_invariants(c);
  return -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6;
}

mpz_class c4(const WeierstrassCurve& c) {
  auto b = b_invariants(c);
  return b.b2 * b.b2 - 24 * b.b4;
}

mpq_class j_invariant(const WeierstrassCurve& c) {
  mpz_class disc = discriminant(c);
  if (disc == 0) throw std::domain_error("j_invariant: singular model (discriminant 0)");
  mpz_class c4v = c4(c);
  mpq_class j(c4v * c4v * c4v, disc);
  j.canonicalize();
  return j;
}

bool is_cm(const WeierstrassCurve& c) {
  mpq_class j = j_invariant(c);
  const auto& js = cm_j_invariants();
  return std::find(js.begin(), js.end(), j) != js.end();
}

bool divides_discriminant(const WeierstrassCurve& c, std::int64_t p) {
  return mpz_divisible_ui_p(discriminant(c).get_mpz_t(), static_cast<unsigned long>(p)) != 0;
}

std::int64_t affine_point_count(const WeierstrassCurve& curve, std::int64_t p) {
  if (p < 2) throw std::invalid_argument("affine_point_count: p must be prime");
  const ReducedModel m = reduce(curve, p);
  std::int64_t count = 0;
  if (p == 2) {
    for (std::int64_t x = 0; x < 2; ++x)
      for (std::int64_t y = 0; y < 2; ++y) {
        std::int64_t lhs = y * y + m.w1 * x * y + m.w3 * y;
        std::int64_t rhs = x * x * x + m.w2 * x * x + m.w4 * x + m.w6;
        if (mod(lhs - rhs, 2) == 0) ++count;
      }
    return count;
  }
  // (2y + w1 x + w3)^2 = 4(x^3 + w2 x^2 + w4 x + w6) + (w1 x + w3)^2, and y -> 2y + w1 x + w3 is a
  // bijection of F_p for odd p, so the count per x is the number of square roots of the right side.
  std::vector<std::uint8_t> roots(static_cast<std::size_t>(p), 0);
  for (std::int64_t y = 0; y < p; ++y) ++roots[static_cast<std::size_t>(y * y % p)];
  for (std::int64_t x = 0; x < p; ++x) {
    std::int64_t f = mod(((x + m.w2) * x % p + m.w4) * x % p + m.w6, p);
    std::int64_t l = (m.w1 * x + m.w3) % p;
    std::int64_t d = (4 * f + l * l) % p;
    count += roots[static_cast<std::size_t>(d)];
  }
  return count;
}

std::int64_t count_points(const WeierstrassCurve& curve, std::int64_t p) {
  if (divides_discriminant(curve, p))
    throw std::domain_error("count_points: p=" + std::to_string(p) + " divides the discriminant of " +
                            curve.label);
  return 1 + affine_point_count(curve, p);
}

std::int64_t ap_good(const WeierstrassCurve& curve, std::int64_t p) { return p + 1 - count_points(curve, p); }

int ap_bad(const WeierstrassCurve& curve, std::int64_t p) {
  if (!curve.is_minimal) throw std::domain_error("ap_bad: model of " + curve.label + " is not marked minimal");
  if (!divides_discriminant(curve, p))
    throw std::domain_error("ap_bad: p=" + std::to_string(p) + " is a good prime for " + curve.label);
  // The reduced curve has exactly one singular point, which is affine; removing it and adding the
  // point at infinity leaves #E_ns = affine count.
  std::int64_t ap = p - affine_point_count(curve, p);
  if (ap < -1 || ap > 1)
    throw std::logic_error("ap_bad: trace " + std::to_string(ap) + " outside {-1,0,1} for " + curve.label);
  return static_cast<int>(ap);
}

std::int64_t frobenius_trace(const WeierstrassCurve& curve, std::int64_t p) {
  return divides_discriminant(curve, p) ? ap_bad(curve, p) : ap_good(curve, p);
}

double normalized_trace(std::int64_t ap, std::int64_t p) {
  if (!within_hasse(ap, p))
    throw std::domain_error("normalized_trace: |a_p|=" + std::to_string(ap) + " exceeds 2 sqrt(" +
                            std::to_string(p) + ")");
  return static_cast<double>(ap) / (2.0 * std::sqrt(static_cast<double>(p)));
}

TraceVector trace_vector(const WeierstrassCurve& curve, std::size_t n) {
  if (!curve.is_minimal) throw std::domain_error("trace_vector: model of " + curve.label + " is not marked minimal");
  TraceVector tv;
  tv.primes = first_primes(n);
  tv.values.reserve(n);
  tv.source = TraceSource::curve_label;
  tv.origin = curve.label;
  const mpz_class disc = discriminant(curve);
  for (std::int64_t p : tv.primes) {
    bool bad = mpz_divisible_ui_p(disc.get_mpz_t(), static_cast<unsigned long>(p)) != 0;
    // p + 1 - #E(F_p) at good primes and p - #E_ns(F_p) at bad ones both reduce to p - affine count.
    std::int64_t ap = p - affine_point_count(curve, p);
    if (bad ? (ap < -1 || ap > 1) : !within_hasse(ap, p))
      throw std::logic_error("trace_vector: a_" + std::to_string(p) + " out of range for " + curve.label);
    tv.values.push_back(ap);
  }
  return tv;
}

std::vector<TraceVector> trace_vectors(const std::vector<WeierstrassCurve>& curves, std::size_t n,
                                       unsigned threads) {
  std::vector<TraceVector> out(curves.size());
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, curves.size()))));
  if (threads == 1) {
    for (std::size_t i = 0; i < curves.size(); ++i) out[i] = trace_vector(curves[i], n);
    return out;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        try {
          for (std::size_t i = t; i < curves.size(); i += threads) out[i] = trace_vector(curves[i], n);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

bool conductor_consistent(const WeierstrassCurve& curve) {
  mpz_class rest = discriminant(curve);
  if (rest == 0) return false;
  for (std::int64_t p : prime_divisors(curve.conductor)) {
    mpz_class pz = static_cast<long>(p);
    if (!mpz_divisible_p(rest.get_mpz_t(), pz.get_mpz_t())) return false;
    while (mpz_divisible_p(rest.get_mpz_t(), pz.get_mpz_t())) rest /= pz;
  }
  return abs(rest) == 1;
}

std::vector<WeierstrassCurve> parse_curves_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("curve csv: empty input");
  auto header = split_csv_line(line);
  const std::vector<std::string> expected{"label", "conductor", "rank", "w1", "w2", "w3", "w4", "w6"};
  if (header != expected) throw std::runtime_error("curve csv: unexpected header '" + line + "'");
  std::vector<WeierstrassCurve> curves;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto f = split_csv_line(line);
    if (f.size() != expected.size())
      throw std::runtime_error("curve csv: line " + std::to_string(lineno) + " has " + std::to_string(f.size()) +
                               " fields");
    try {
      WeierstrassCurve c;
      c.label = f[0];
      c.conductor = std::stoll(f[1]);
      c.rank = std::stoi(f[2]);
      c.w1 = std::stoll(f[3]);
      c.w2 = std::stoll(f[4]);
      c.w3 = std::stoll(f[5]);
      c.w4 = std::stoll(f[6]);
      c.w6 = std::stoll(f[7]);
      c.is_minimal = true;
      if (c.conductor < 1 || c.rank < 0) throw std::out_of_range("conductor/rank");
      if (discriminant(c) == 0) throw std::domain_error("singular model");
      curves.push_back(std::move(c));
    } catch (const std::exception& e) {
      throw std::runtime_error("curve csv: line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return curves;
}

std::vector<WeierstrassCurve> read_curves_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open curve table " + path);
  try {
    return parse_curves_csv(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void write_curves_csv(std::ostream& out, const std::vector<WeierstrassCurve>& curves) {
  out << "label,conductor,rank,w1,w2,w3,w4,w6\n";
  for (const auto& c : curves)
    out << c.label << ',' << c.conductor << ',' << c.rank << ',' << c.w1 << ',' << c.w2 << ',' << c.w3 << ','
        << c.w4 << ',' << c.w6 << '\n';
}

void write_traces_csv(std::ostream& out, const std::vector<TraceVector>& traces) {
  out << "label";
  if (!traces.empty())
    for (auto p : traces.front().primes) out << ',' << p;
  out << '\n';
  for (const auto& t : traces) {
    out << t.origin;
    for (auto v : t.values) out << ',' << v;
    out << '\n';
  }
}

}  // namespace twistcnn::arith
