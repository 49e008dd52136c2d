// Little-endian primitives shared by the binary container formats.
#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace twistcnn::io {

inline void put_u(std::ostream& out, std::uint64_t v, int bytes) {
  char buf[8];
  for (int i = 0; i < bytes; ++i) buf[i] = static_cast<char>(v >> (8 * i));
  out.write(buf, bytes);
}

inline std::uint64_t get_u(std::istream& in, int bytes) {
  unsigned char buf[8] = {};
  if (!in.read(reinterpret_cast<char*>(buf), bytes)) throw std::runtime_error("unexpected end of file");
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= std::uint64_t{buf[i]} << (8 * i);
  return v;
}

inline void put_f64(std::ostream& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u(out, bits, 8);
}

inline double get_f64(std::istream& in) {
  std::uint64_t bits = get_u(in, 8);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

inline void put_f32(std::ostream& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_u(out, bits, 4);
}

inline float get_f32(std::istream& in) {
  auto bits = static_cast<std::uint32_t>(get_u(in, 4));
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

}  // namespace twistcnn::io
