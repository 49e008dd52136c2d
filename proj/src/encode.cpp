#include "twistcnn/encode.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace twistcnn::encode {
namespace {

void put_le(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_le(std::span<const std::uint8_t> in, std::size_t offset, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= std::uint64_t{in[offset + static_cast<std::size_t>(i)]} << (8 * i);
  return v;
}

std::vector<std::uint8_t> header_bytes(std::uint64_t count, CvtfShape shape) {
  std::vector<std::uint8_t> h{'C', 'V', 'T', 'F'};
  put_le(h, cvtf_version, 2);
  put_le(h, count, 8);
  put_le(h, shape.channels, 2);
  put_le(h, shape.rows, 2);
  put_le(h, shape.cols, 2);
  h.push_back(0);  // dtype: binary32 little-endian
  return h;
}

void append_floats(std::vector<std::uint8_t>& out, std::span<const float> values) {
  for (float f : values) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_le(out, bits, 4);
  }
}

}  // namespace

std::uint8_t quantize(double v) {
  double q = std::floor(255.0 * v);
  if (!(q >= 0.0 && q <= 255.0)) throw std::domain_error("quantize: value " + std::to_string(v) + " outside [0,1]");
  return static_cast<std::uint8_t>(q);
}

ConductorFamilyMatrix conductor_matrix(const std::vector<arith::TraceVector>& traces) {
  ConductorFamilyMatrix m;
  m.rows = traces.size();
  if (traces.empty()) return m;
  m.primes = traces.front().primes;
  m.cols = m.primes.size();
  m.entries.reserve(m.rows * m.cols);
  for (const auto& t : traces) {
    if (t.primes != m.primes) throw std::invalid_argument("conductor_matrix: traces use different prime lists");
    m.row_labels.push_back(t.origin);
    for (std::size_t j = 0; j < m.cols; ++j) {
      std::int64_t ap = t.values[j], p = m.primes[j];
      if (!arith::within_hasse(ap, p))
        throw std::domain_error("conductor_matrix: a_" + std::to_string(p) + "=" + std::to_string(ap) + " of " +
                                t.origin + " violates the Hasse bound");
      m.entries.push_back(0.5 - static_cast<double>(ap) / (4.0 * std::sqrt(static_cast<double>(p))));
    }
  }
  return m;
}

Image grey_quantize(const ConductorFamilyMatrix& m) {
  Image img{m.cols, m.rows, 1, {}};
  img.pixels.reserve(m.entries.size());
  for (double v : m.entries) img.pixels.push_back(quantize(v));
  return img;
}

TwistBasis::TwistBasis(std::vector<std::int64_t> primes, std::vector<chars::DirichletCharacter> characters)
    : primes_(std::move(primes)), characters_(std::move(characters)) {
  values_.reserve(primes_.size() * characters_.size());
  for (auto p : primes_)
    for (const auto& chi : characters_) values_.push_back(chi.value(p));
}

void twist_channels(std::span<const double> z, const TwistBasis& basis, std::span<float> out) {
  const std::size_t rows = basis.rows(), cols = basis.cols();
  if (z.size() != rows) throw std::invalid_argument("twist_field: z has " + std::to_string(z.size()) +
                                                    " entries for " + std::to_string(rows) + " primes");
  if (out.size() != 2 * rows * cols) throw std::invalid_argument("twist_field: output buffer has wrong size");
  for (std::size_t i = 0; i < rows; ++i) {
    double zp = z[i];
    if (!(std::abs(zp) <= 1.0 + z_tolerance))
      throw std::domain_error("twist_field: |z_p| = " + std::to_string(std::abs(zp)) + " exceeds 1");
    zp = std::clamp(zp, -1.0, 1.0);
    for (std::size_t j = 0; j < cols; ++j) {
      std::complex<double> w = zp * basis.at(i, j);
      out[i * cols + j] = static_cast<float>(0.5 - w.real() / 2.0);
      out[rows * cols + i * cols + j] = static_cast<float>(0.5 - w.imag() / 2.0);
    }
  }
}

TwistField twist_field(std::span<const double> z, const TwistBasis& basis, std::string origin) {
  std::vector<float> buf(2 * basis.rows() * basis.cols());
  twist_channels(z, basis, buf);
  TwistField f;
  f.rows = basis.rows();
  f.cols = basis.cols();
  const auto half = static_cast<std::ptrdiff_t>(f.rows * f.cols);
  f.red.assign(buf.begin(), buf.begin() + half);
  f.blue.assign(buf.begin() + half, buf.end());
  f.origin = std::move(origin);
  return f;
}

Image quantize(const TwistField& field) {
  Image img{field.cols, field.rows, 3, {}};
  img.pixels.reserve(field.red.size() * 3);
  for (std::size_t k = 0; k < field.red.size(); ++k) {
    img.pixels.push_back(quantize(field.red[k]));
    img.pixels.push_back(green_level);
    img.pixels.push_back(quantize(field.blue[k]));
  }
  return img;
}

std::vector<float> to_tensor(const TwistField& field) {
  std::vector<float> t(field.red);
  t.insert(t.end(), field.blue.begin(), field.blue.end());
  return t;
}

std::vector<double> normalized_traces(const arith::TraceVector& tv, bool clamp) {
  std::vector<double> z(tv.values.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    double v = static_cast<double>(tv.values[i]) / (2.0 * std::sqrt(static_cast<double>(tv.primes[i])));
    if (clamp) v = std::clamp(v, -1.0, 1.0);
    z[i] = v;
  }
  return z;
}

std::vector<std::uint8_t> encode_png(const Image& image) {
  if (image.channels != 1 && image.channels != 3) throw std::invalid_argument("encode_png: 1 or 3 channels only");
  if (image.width == 0 || image.height == 0) throw std::invalid_argument("encode_png: empty image");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("encode_png: libpng init failed");
  png_infop info = png_create_info_struct(png);
  std::vector<std::uint8_t> out;
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("encode_png: libpng error");
  }
  png_set_write_fn(
      png, &out,
      [](png_structp p, png_bytep data, png_size_t len) {
        auto* v = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(p));
        v->insert(v->end(), data, data + len);
      },
      nullptr);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height), 8,
               image.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 9);
  png_write_info(png, info);
  const std::size_t stride = image.width * static_cast<std::size_t>(image.channels);
  for (std::size_t r = 0; r < image.height; ++r)
    png_write_row(png, const_cast<png_bytep>(image.pixels.data() + r * stride));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

Image decode_png(std::span<const std::uint8_t> bytes) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size()))
    throw std::runtime_error(std::string("decode_png: ") + img.message);
  const bool grey = (img.format & PNG_FORMAT_FLAG_COLOR) == 0;
  img.format = grey ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  Image out{img.width, img.height, grey ? 1 : 3, {}};
  out.pixels.resize(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr)) {
    std::string msg = img.message;
    png_image_free(&img);
    throw std::runtime_error("decode_png: " + msg);
  }
  return out;
}

void write_png(const std::filesystem::path& path, const Image& image) {
  auto bytes = encode_png(image);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_png: cannot open " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write_png: write failed for " + path.string());
}

Image read_png(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("read_png: cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  try {
    return decode_png(bytes);
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

Image heatmap(std::span<const double> values, std::size_t rows, std::size_t cols) {
  if (values.size() != rows * cols) throw std::invalid_argument("heatmap: size mismatch");
  double hi = 0.0;
  for (double v : values) hi = std::max(hi, v);
  Image img{cols, rows, 1, {}};
  img.pixels.reserve(values.size());
  for (double v : values) img.pixels.push_back(hi > 0.0 ? quantize(std::clamp(v / hi, 0.0, 1.0)) : 0);
  return img;
}

void write_matrix_csv(std::ostream& out, const ConductorFamilyMatrix& m) {
  out << "label";
  for (auto p : m.primes) out << ',' << p;
  out << '\n';
  out.precision(17);
  for (std::size_t r = 0; r < m.rows; ++r) {
    out << m.row_labels[r];
    for (std::size_t c = 0; c < m.cols; ++c) out << ',' << m.at(r, c);
    out << '\n';
  }
}

CvtfWriter::CvtfWriter(const std::filesystem::path& path, std::uint64_t count, CvtfShape shape)
    : path_(path), out_(path, std::ios::binary), count_(count), shape_(shape) {
  if (!out_) throw std::runtime_error("CVTF: cannot open " + path.string() + " for writing");
  auto h = header_bytes(count, shape);
  out_.write(reinterpret_cast<const char*>(h.data()), static_cast<std::streamsize>(h.size()));
}

CvtfWriter::~CvtfWriter() {
  if (!closed_) {
    try {
      close();
    } catch (...) {
    }
  }
}

void CvtfWriter::add(std::span<const float> sample, std::uint8_t label) {
  if (closed_) throw std::logic_error("CVTF: add after close");
  if (sample.size() != shape_.sample_size()) throw std::invalid_argument("CVTF: sample shape mismatch");
  if (labels_.size() == count_) throw std::length_error("CVTF: more samples than declared");
  std::vector<std::uint8_t> buf;
  buf.reserve(sample.size() * 4);
  append_floats(buf, sample);
  out_.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  labels_.push_back(label);
}

void CvtfWriter::close() {
  if (closed_) return;
  closed_ = true;
  if (labels_.size() != count_)
    throw std::length_error("CVTF: " + path_.string() + " declared " + std::to_string(count_) + " samples, got " +
                            std::to_string(labels_.size()));
  out_.write(reinterpret_cast<const char*>(labels_.data()), static_cast<std::streamsize>(labels_.size()));
  out_.close();
  if (!out_) throw std::runtime_error("CVTF: write failed for " + path_.string());
}

std::vector<std::uint8_t> serialize_dataset(const CvtfDataset& ds) {
  if (ds.values.size() != ds.count() * ds.shape.sample_size())
    throw std::invalid_argument("CVTF: payload size does not match count and shape");
  auto out = header_bytes(ds.count(), ds.shape);
  out.reserve(out.size() + ds.values.size() * 4 + ds.labels.size());
  append_floats(out, ds.values);
  out.insert(out.end(), ds.labels.begin(), ds.labels.end());
  return out;
}

CvtfDataset parse_dataset(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < cvtf_header_size) throw std::runtime_error("CVTF: truncated header");
  if (std::memcmp(bytes.data(), "CVTF", 4) != 0) throw std::runtime_error("CVTF: bad magic");
  auto version = get_le(bytes, 4, 2);
  if (version != cvtf_version) throw std::runtime_error("CVTF: unsupported version " + std::to_string(version));
  std::uint64_t count = get_le(bytes, 6, 8);
  CvtfDataset ds;
  ds.shape.channels = static_cast<std::uint16_t>(get_le(bytes, 14, 2));
  ds.shape.rows = static_cast<std::uint16_t>(get_le(bytes, 16, 2));
  ds.shape.cols = static_cast<std::uint16_t>(get_le(bytes, 18, 2));
  if (bytes[20] != 0) throw std::runtime_error("CVTF: unsupported dtype " + std::to_string(bytes[20]));
  const std::uint64_t per = ds.shape.sample_size();
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() / 8;
  if (per != 0 && count > limit / per) throw std::runtime_error("CVTF: shape overflow");
  const std::uint64_t payload = count * per * 4;
  if (bytes.size() - cvtf_header_size < payload + count)
    throw std::runtime_error("CVTF: truncated payload");
  if (bytes.size() - cvtf_header_size > payload + count) throw std::runtime_error("CVTF: trailing bytes");
  ds.values.resize(count * per);
  for (std::size_t i = 0; i < ds.values.size(); ++i) {
    auto bits = static_cast<std::uint32_t>(get_le(bytes, cvtf_header_size + 4 * i, 4));
    std::memcpy(&ds.values[i], &bits, 4);
  }
  auto lab = bytes.subspan(cvtf_header_size + payload, count);
  ds.labels.assign(lab.begin(), lab.end());
  return ds;
}

void write_dataset(const std::filesystem::path& path, const CvtfDataset& ds) {
  auto bytes = serialize_dataset(ds);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("CVTF: cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("CVTF: write failed for " + path.string());
}

CvtfDataset read_dataset(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("CVTF: cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  try {
    return parse_dataset(bytes);
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace twistcnn::encode
