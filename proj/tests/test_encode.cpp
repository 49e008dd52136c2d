#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "twistcnn/encode.hpp"
#include "twistcnn/primes.hpp"

using namespace twistcnn;
using namespace twistcnn::encode;

namespace {

arith::TraceVector traces(std::vector<std::int64_t> primes, std::vector<std::int64_t> values) {
  return {std::move(primes), std::move(values), arith::TraceSource::curve_label, "t"};
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("twistcnn_test_" + name);
}

}  // namespace

TEST(ConductorMatrix, Entries) {
  auto m = conductor_matrix({traces({2, 3}, {0, 0}), traces({2, 3}, {-2, 2})});
  EXPECT_DOUBLE_EQ(m.at(0, 0), 0.5);
  EXPECT_NEAR(m.at(1, 0), 0.85355339059327373, 1e-15);
  EXPECT_NEAR(0.5 - 2 / (4 * std::sqrt(2.0)), 0.146446, 1e-6);
  EXPECT_THROW(conductor_matrix({traces({2}, {3})}), std::domain_error);
}

TEST(GreyQuantize, Pixels) {
  EXPECT_EQ(quantize(0.5), 127);
  EXPECT_EQ(quantize(0.853553), 217);
  EXPECT_EQ(quantize(1.0), 255);
  EXPECT_EQ(quantize(0.0), 0);
  EXPECT_THROW(quantize(1.01), std::domain_error);
  auto img = grey_quantize(conductor_matrix({traces({2, 3, 5}, {0, -2, 1})}));
  EXPECT_EQ(img.width, 3u);
  EXPECT_EQ(img.height, 1u);
  EXPECT_EQ(img.at(0, 0), 127);
}

TEST(GreyQuantize, LossBelowOneLevel) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100000; ++i) {
    double v = u(rng);
    double loss = 255.0 * v - quantize(v);
    ASSERT_GE(loss, 0.0);
    ASSERT_LT(loss, 1.0);
  }
}

TEST(TwistField, HandExample) {
  // a_2 = -2 gives z_2 = -1/sqrt(2); the mod-5 character with chi(2) = i rotates it onto the
  // imaginary axis.
  TwistBasis basis({2}, {chars::DirichletCharacter(5, {1})});
  std::vector<double> z{-2.0 / (2.0 * std::sqrt(2.0))};
  auto f = twist_field(z, basis);
  EXPECT_FLOAT_EQ(f.r(0, 0), 0.5f);
  EXPECT_NEAR(f.b(0, 0), 0.853553, 1e-6);
  auto img = quantize(f);
  EXPECT_EQ(img.at(0, 0, 0), 127);
  EXPECT_EQ(img.at(0, 0, 1), 127);
  EXPECT_EQ(img.at(0, 0, 2), 217);
}

TEST(TwistField, ZeroCharacterValuesAndRealColumns) {
  auto chars = chars::enumerate_primitive(20);
  auto primes = first_primes(20);
  TwistBasis basis(primes, chars);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> z(20);
  for (auto& v : z) v = u(rng);
  auto f = twist_field(z, basis);
  auto img = quantize(f);
  for (std::size_t i = 0; i < 20; ++i)
    for (std::size_t j = 0; j < 20; ++j) {
      EXPECT_EQ(img.at(i, j, 1), green_level);
      if (chars[j].value(primes[i]) == std::complex<double>(0, 0)) {
        EXPECT_EQ(f.r(i, j), 0.5f);
        EXPECT_EQ(f.b(i, j), 0.5f);
        EXPECT_EQ(img.at(i, j, 0), 127);
      }
      if (chars[j].is_real()) {
        EXPECT_EQ(f.b(i, j), 0.5f);
        EXPECT_EQ(img.at(i, j, 2), 127);
      }
    }
  // column 0 is the trivial character: R reproduces 1/2 - z/2
  for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(f.r(i, 0), static_cast<float>(0.5 - z[i] / 2));
}

TEST(TwistField, RejectsOversizedZ) {
  TwistBasis basis({2}, chars::enumerate_primitive(1));
  std::vector<double> ok{1.0 + 1e-13}, bad{1.001};
  EXPECT_NO_THROW(twist_field(ok, basis));
  EXPECT_THROW(twist_field(bad, basis), std::domain_error);
}

TEST(ToTensor, ShapeAndRequantize) {
  auto chars = chars::enumerate_primitive(100);
  TwistBasis basis(first_primes(100), chars);
  std::vector<double> zero(100, 0.0);
  auto t0 = to_tensor(twist_field(zero, basis));
  ASSERT_EQ(t0.size(), 2u * 100 * 100);
  for (float v : t0) ASSERT_EQ(v, 0.5f);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> z(100);
  for (auto& v : z) v = u(rng);
  auto f = twist_field(z, basis);
  auto t = to_tensor(f);
  auto img = quantize(f);
  for (std::size_t k = 0; k < 100 * 100; ++k) {
    ASSERT_EQ(quantize(t[k]), img.pixels[3 * k]);
    ASSERT_EQ(quantize(t[100 * 100 + k]), img.pixels[3 * k + 2]);
  }
}

TEST(Png, RoundTrips) {
  Image grey{1, 1, 1, {127}};
  EXPECT_EQ(decode_png(encode_png(grey)).pixels, grey.pixels);
  Image rgb{2, 2, 3, {10, 127, 20, 30, 127, 40, 50, 127, 60, 255, 127, 0}};
  auto back = decode_png(encode_png(rgb));
  EXPECT_EQ(back.channels, 3);
  EXPECT_EQ(back.pixels, rgb.pixels);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(back.pixels[3 * k + 1], 127);
  EXPECT_EQ(encode_png(rgb), encode_png(rgb));
  auto path = temp_file("rt.png");
  write_png(path, rgb);
  EXPECT_EQ(read_png(path).pixels, rgb.pixels);
  std::filesystem::remove(path);
  EXPECT_THROW(read_png(temp_file("does_not_exist.png")), std::runtime_error);
}

TEST(Cvtf, HeaderAndRoundTrip) {
  CvtfDataset empty;
  empty.shape = {2, 3, 3};
  auto bytes = serialize_dataset(empty);
  EXPECT_EQ(bytes.size(), cvtf_header_size);
  EXPECT_EQ(cvtf_header_size, 4u + 2 + 8 + 2 + 2 + 2 + 1);
  EXPECT_EQ(parse_dataset(bytes).count(), 0u);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> u(0.f, 1.f);
  CvtfDataset ds;
  ds.shape = {2, 4, 5};
  for (int i = 0; i < 3 * 40; ++i) ds.values.push_back(u(rng));
  ds.labels = {1, 0, 2};
  auto path = temp_file("rt.cvtf");
  write_dataset(path, ds);
  auto back = read_dataset(path);
  EXPECT_EQ(back.shape.channels, 2);
  EXPECT_EQ(back.shape.rows, 4);
  EXPECT_EQ(back.shape.cols, 5);
  EXPECT_EQ(back.labels, ds.labels);
  EXPECT_EQ(std::memcmp(back.values.data(), ds.values.data(), ds.values.size() * 4), 0);

  {
    CvtfWriter w(path, 3, ds.shape);
    for (int i = 0; i < 3; ++i) w.add(ds.sample(static_cast<std::size_t>(i)), ds.labels[static_cast<std::size_t>(i)]);
    w.close();
  }
  EXPECT_EQ(serialize_dataset(read_dataset(path)), serialize_dataset(ds));
  std::filesystem::remove(path);
}

TEST(Cvtf, Errors) {
  CvtfDataset ds;
  ds.shape = {1, 1, 2};
  ds.values = {0.25f, 0.75f};
  ds.labels = {1};
  auto bytes = serialize_dataset(ds);
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(parse_dataset(bad), std::runtime_error);
  bad = bytes;
  bad[4] = 9;
  EXPECT_THROW(parse_dataset(bad), std::runtime_error);
  bad = bytes;
  bad.pop_back();
  EXPECT_THROW(parse_dataset(bad), std::runtime_error);
  bad = bytes;
  for (int i = 6; i < 14; ++i) bad[static_cast<std::size_t>(i)] = 0xff;
  EXPECT_THROW(parse_dataset(bad), std::runtime_error);
  EXPECT_THROW(parse_dataset(std::vector<std::uint8_t>(5, 0)), std::runtime_error);
}
