#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "twistcnn/characters.hpp"
#include "twistcnn/curve_arith.hpp"

namespace twistcnn::encode {

/// Rows are curves, columns are primes; entry = 1/2 - a_p / (4 sqrt p).
struct ConductorFamilyMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> entries;
  std::vector<std::string> row_labels;
  std::vector<std::int64_t> primes;

  double at(std::size_t r, std::size_t c) const { return entries[r * cols + c]; }
};

/// 8-bit raster, 1 (grey) or 3 (RGB) interleaved channels, rows top to bottom.
struct Image {
  std::size_t width = 0, height = 0;
  int channels = 1;
  std::vector<std::uint8_t> pixels;

  std::uint8_t at(std::size_t row, std::size_t col, int channel = 0) const {
    return pixels[(row * width + col) * static_cast<std::size_t>(channels) + static_cast<std::size_t>(channel)];
  }
};

inline constexpr std::uint8_t green_level = 127;  // 2^7 - 1

/// floor(255 v) for v in [0, 1].
std::uint8_t quantize(double v);

ConductorFamilyMatrix conductor_matrix(const std::vector<arith::TraceVector>& traces);
Image grey_quantize(const ConductorFamilyMatrix& m);

/// chi(p) for every (prime, character) pair, the fixed part of every twist field.
class TwistBasis {
 public:
  TwistBasis(std::vector<std::int64_t> primes, std::vector<chars::DirichletCharacter> characters);

  std::size_t rows() const { return primes_.size(); }
  std::size_t cols() const { return characters_.size(); }
  const std::vector<std::int64_t>& primes() const { return primes_; }
  const std::vector<chars::DirichletCharacter>& characters() const { return characters_; }
  std::complex<double> at(std::size_t row, std::size_t col) const { return values_[row * cols() + col]; }

 private:
  std::vector<std::int64_t> primes_;
  std::vector<chars::DirichletCharacter> characters_;
  std::vector<std::complex<double>> values_;
};

/// Full-precision red/blue channels (binary32) of V(p, chi) = (1/2 - X/2, 127, 1/2 - Y/2) with
/// X + iY = z_p chi(p). Rows follow the primes, columns the characters.
struct TwistField {
  std::size_t rows = 0, cols = 0;
  std::vector<float> red, blue;
  std::string origin;

  float r(std::size_t row, std::size_t col) const { return red[row * cols + col]; }
  float b(std::size_t row, std::size_t col) const { return blue[row * cols + col]; }
};

inline constexpr double z_tolerance = 1e-12;

/// Throws std::domain_error when |z_p| > 1 + z_tolerance; values inside the tolerance are clamped.
TwistField twist_field(std::span<const double> z, const TwistBasis& basis, std::string origin = {});

/// Writes the (2, rows, cols) red/blue tensor straight into `out`.
void twist_channels(std::span<const double> z, const TwistBasis& basis, std::span<float> out);

/// 24-bit encoding (floor(255 R), 127, floor(255 B)).
Image quantize(const TwistField& field);

/// Channel 0 = R, channel 1 = B, row-major (2, rows, cols).
std::vector<float> to_tensor(const TwistField& field);

/// z_p = a_p / (2 sqrt p); random vectors clamp rounding overshoot to [-1, 1].
std::vector<double> normalized_traces(const arith::TraceVector& tv, bool clamp = false);

std::vector<std::uint8_t> encode_png(const Image& image);
Image decode_png(std::span<const std::uint8_t> bytes);
void write_png(const std::filesystem::path& path, const Image& image);
Image read_png(const std::filesystem::path& path);

/// Heat-map rendering of a non-negative matrix, scaled by its maximum, to 8-bit grey.
Image heatmap(std::span<const double> values, std::size_t rows, std::size_t cols);

void write_matrix_csv(std::ostream& out, const ConductorFamilyMatrix& m);

// CVTF container: "CVTF", u16 version, u64 count, u16 channels, u16 rows, u16 cols, u8 dtype,
// then count*channels*rows*cols little-endian binary32 values, then count label bytes.
inline constexpr std::uint16_t cvtf_version = 1;
inline constexpr std::size_t cvtf_header_size = 21;

struct CvtfShape {
  std::uint16_t channels = 0, rows = 0, cols = 0;
  std::size_t sample_size() const { return std::size_t{channels} * rows * cols; }
};

struct CvtfDataset {
  CvtfShape shape;
  std::vector<float> values;
  std::vector<std::uint8_t> labels;

  std::size_t count() const { return labels.size(); }
  std::span<const float> sample(std::size_t i) const {
    return std::span<const float>(values).subspan(i * shape.sample_size(), shape.sample_size());
  }
};

/// Streams samples to disk; labels are appended on close().
class CvtfWriter {
 public:
  CvtfWriter(const std::filesystem::path& path, std::uint64_t count, CvtfShape shape);
  ~CvtfWriter();
  CvtfWriter(const CvtfWriter&) = delete;
  CvtfWriter& operator=(const CvtfWriter&) = delete;

  void add(std::span<const float> sample, std::uint8_t label);
  void close();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::uint64_t count_;
  CvtfShape shape_;
  std::vector<std::uint8_t> labels_;
  bool closed_ = false;
};

void write_dataset(const std::filesystem::path& path, const CvtfDataset& ds);
CvtfDataset read_dataset(const std::filesystem::path& path);
std::vector<std::uint8_t> serialize_dataset(const CvtfDataset& ds);
CvtfDataset parse_dataset(std::span<const std::uint8_t> bytes);

}  // namespace twistcnn::encode
