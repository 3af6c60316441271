#include <gtest/gtest.h>

#include <sstream>

#include "bcr/certificate.hpp"

namespace bcr {
namespace {

Barcode square_code(std::size_t side, std::size_t x0, std::size_t k) {
  BinaryImage img(side, side);
  for (std::size_t y = x0; y < x0 + k; ++y)
    for (std::size_t x = x0; x < x0 + k; ++x)
      img.set(x, y, true);
  return Barcode::from_image(img);
}

double max_row_slope(const GridImage &v1) {
  double s = 0.0;
  for (std::size_t y = 0; y < v1.height(); ++y)
    for (std::size_t x = 0; x + 1 < v1.width(); ++x)
      s = std::max(s, std::abs(v1(x + 1, y) - v1(x, y)));
  return s;
}

TEST(Certificate, SquareProfile) {
  const auto b = square_code(24, 8, 8);
  const auto v = build_certificate(b);
  for (std::size_t y = 8; y < 16; ++y)
    for (std::size_t e = 0; e < 23; ++e) {
      double expect;
      if (e <= 7)
        expect = (e + 1) / 8.0;
      else if (e <= 15)
        expect = 1.0 - 2.0 * (e - 7) / 8.0;
      else
        expect = -1.0 + (e - 15) / 8.0;
      EXPECT_NEAR(v.v1(e, y), expect, 1e-15) << "edge " << e;
    }
  // Rows that miss the square carry no horizontal field.
  for (std::size_t e = 0; e < 23; ++e)
    EXPECT_EQ(v.v1(e, 3), 0.0);
  EXPECT_EQ(v.v2, transpose(v.v1));
  EXPECT_NEAR(max_row_slope(v.v1), 2.0 / 8.0, 1e-15);
}

TEST(Certificate, SquareVerifies) {
  const auto b = square_code(24, 8, 8);
  const auto r = verify_certificate(b.image, build_certificate(b), 0.5);
  EXPECT_NEAR(r.inf_norm_div, 0.5, 1e-12);
  EXPECT_NEAR(r.duality_lhs, 32.0, 1e-12);
  EXPECT_EQ(r.tv_value, 32.0);
  EXPECT_EQ(r.inf_norm_v, 1.0);
  EXPECT_TRUE(r.passed());
  EXPECT_FALSE(verify_certificate(b.image, build_certificate(b), 0.49).passed());
}

TEST(Certificate, TrivialField) {
  const auto r = verify_certificate(BinaryImage(4, 4), VectorField::zero(4, 4), 0.0);
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.inf_norm_div, 0.0);
}

TEST(Certificate, DetectsViolations) {
  const auto b = square_code(12, 4, 4);
  auto v = build_certificate(b);
  v.v1(0, 5) = 1.5;
  EXPECT_FALSE(verify_certificate(b.image, v, 10.0).bounded);
  v = VectorField::zero(12, 12);
  EXPECT_FALSE(verify_certificate(b.image, v, 10.0).duality);
  EXPECT_THROW(verify_certificate(b.image, VectorField::zero(11, 12), 1.0),
               std::invalid_argument);
}

TEST(Certificate, Preconditions) {
  EXPECT_THROW(build_certificate(Barcode{BinaryImage(4, 4), 1}), std::invalid_argument);
  BinaryImage edge(4, 4);
  edge.set(0, 1, true);
  EXPECT_THROW(build_certificate(Barcode{edge, 1}), std::invalid_argument);
}

TEST(Certificate, CsvReport) {
  const auto b = square_code(24, 8, 8);
  std::ostringstream os;
  verify_certificate(b.image, build_certificate(b), 1.0).write_csv(os);
  EXPECT_EQ(os.str().rfind("key,value\n", 0), 0u);
  EXPECT_NE(os.str().find("passed,1\n"), std::string::npos);
}

class GeneratedCodes : public ::testing::TestWithParam<std::size_t> {};

TEST_P(GeneratedCodes, DivergenceBoundAndDuality) {
  const std::size_t p = GetParam();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    BarcodeSpec spec;
    spec.pixels_per_module = p;
    spec.seed = seed;
    const auto b = generate(spec);
    const auto r = verify_certificate(b.image, build_certificate(b), 4.0 / p);
    EXPECT_LE(r.inf_norm_div, 4.0 / p + 1e-9) << "seed " << seed;
    EXPECT_TRUE(r.passed()) << "seed " << seed;
  }
}

INSTANTIATE_TEST_SUITE_P(ModuleSizes, GeneratedCodes, ::testing::Values(2, 4, 8, 12));

TEST(Certificate, MonotoneInLambda) {
  BarcodeSpec spec;
  spec.seed = 3;
  const auto b = generate(spec);
  const auto v = build_certificate(b);
  const double bound = verify_certificate(b.image, v, 0.0).inf_norm_div;
  for (double lb : {bound, bound * 1.5, bound + 1.0, 100.0})
    EXPECT_TRUE(verify_certificate(b.image, v, lb).passed());
  EXPECT_FALSE(verify_certificate(b.image, v, bound * 0.9).passed());
}

TEST(Certificate, DivergenceScalesUnderReplication) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    BarcodeSpec spec;
    spec.pixels_per_module = 4;
    spec.seed = seed;
    const auto b = generate(spec);
    const double base = verify_certificate(b.image, build_certificate(b), 1.0).inf_norm_div;
    for (std::size_t s : {2u, 3u}) {
      const auto big = Barcode::from_image(upsample(b.image, s));
      const double scaled =
          verify_certificate(big.image, build_certificate(big), 1.0).inf_norm_div;
      EXPECT_NEAR(scaled, base / s, 1e-12) << "seed " << seed << " s " << s;
    }
  }
}

} // namespace
} // namespace bcr
