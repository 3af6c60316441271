#include <gtest/gtest.h>

#include <cmath>

#include "bcr/functional.hpp"
#include "oracles.hpp"

namespace bcr {
namespace {

GridImage single_pixel(std::size_t side = 5) {
  GridImage img(side, side);
  img(side / 2, side / 2) = 1.0;
  return img;
}

GridImage block(std::size_t side, std::size_t x0, std::size_t k) {
  GridImage img(side, side);
  for (std::size_t y = x0; y < x0 + k; ++y)
    for (std::size_t x = x0; x < x0 + k; ++x)
      img(x, y) = 1.0;
  return img;
}

double dot(const GridImage &a, const GridImage &b) {
  return as_vector(a).dot(as_vector(b));
}

TEST(DiffOperators, Shapes) {
  const auto d = forward_diff_matrices(2, 2);
  EXPECT_EQ(d.dx.rows(), 2);
  EXPECT_EQ(d.dx.cols(), 4);
  EXPECT_EQ(d.dy.rows(), 2);
  EXPECT_EQ(d.dy.cols(), 4);
  const auto e = forward_diff_matrices(5, 3);
  EXPECT_EQ(e.dx.rows(), 12);
  EXPECT_EQ(e.dy.rows(), 10);
  EXPECT_THROW(forward_diff_matrices(1, 3), std::invalid_argument);
  EXPECT_THROW(forward_diff_matrices(3, 1), std::invalid_argument);
}

TEST(DiffOperators, RowsArePlusMinusOne) {
  const auto d = forward_diff_matrices(4, 3);
  for (const SparseMatrix *m : {&d.dx, &d.dy}) {
    const SparseMatrix rows = SparseMatrix(m->transpose());
    for (Eigen::Index r = 0; r < rows.outerSize(); ++r) {
      int count = 0;
      double s = 0.0;
      for (SparseMatrix::InnerIterator it(rows, r); it; ++it) {
        ++count;
        s += it.value();
        EXPECT_EQ(std::abs(it.value()), 1.0);
      }
      EXPECT_EQ(count, 2);
      EXPECT_EQ(s, 0.0);
    }
  }
}

TEST(DiffOperators, Examples) {
  const auto d = forward_diff_matrices(2, 2);
  const GridImage c(2, 2, 0.7);
  EXPECT_EQ((d.dx * as_vector(c)).lpNorm<Eigen::Infinity>(), 0.0);
  const GridImage step(2, 2, std::vector<double>{0, 1, 0, 1});
  const Eigen::VectorXd g = d.dx * as_vector(step);
  EXPECT_EQ(g, Eigen::Vector2d(1, 1));
}

TEST(AnisoTv, Examples) {
  EXPECT_EQ(aniso_tv(GridImage(4, 4)), 0.0);
  EXPECT_EQ(aniso_tv(single_pixel()), 4.0);
  for (std::size_t k = 1; k <= 5; ++k)
    EXPECT_EQ(aniso_tv(block(k + 4, 2, k)), 4.0 * k);
}

TEST(AnisoTv, MatchesMatrixForm) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto img = oracle::random_image(seed, 7, 9, -1.0, 2.0);
    const auto d = forward_diff_matrices(7, 9);
    const double tv = (d.dx * as_vector(img)).lpNorm<1>() + (d.dy * as_vector(img)).lpNorm<1>();
    EXPECT_NEAR(aniso_tv(img), tv, 1e-12);
  }
}

TEST(IsoTv, Examples) {
  EXPECT_EQ(iso_tv(GridImage(3, 3)), 0.0);
  EXPECT_NEAR(iso_tv(single_pixel()), 2.0 + std::sqrt(2.0), 1e-15);
}

TEST(Seminorm, IsoAndAnisoAreEquivalent) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto img = oracle::random_image(seed, 6 + seed % 5, 5 + seed % 7, -3.0, 3.0);
    const double iso = iso_tv(img), an = aniso_tv(img);
    EXPECT_LE(iso, an + 1e-12);
    EXPECT_LE(an, std::sqrt(2.0) * iso + 1e-12);
  }
}

TEST(Coarea, IntegerImagesDecomposeIntoLevelSets) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto img = oracle::random_image(seed, 8, 7, 0.0, 6.0);
    for (double &v : img.values())
      v = std::floor(v); // values 0..5
    double levels = 0.0;
    for (int t = 0; t < 5; ++t) {
      GridImage ind(img.width(), img.height());
      for (std::size_t i = 0; i < img.size(); ++i)
        ind.values()[i] = img.values()[i] > t ? 1.0 : 0.0;
      levels += aniso_tv(ind);
    }
    EXPECT_EQ(aniso_tv(img), levels);
  }
}

TEST(Divergence, Examples) {
  const auto z = divergence(GridImage(3, 4), GridImage(4, 3));
  EXPECT_EQ(z, GridImage(4, 4));
  EXPECT_THROW(divergence(GridImage(4, 4), GridImage(4, 3)), std::invalid_argument);

  // Constant horizontal field telescopes to the left and right columns.
  const auto d = divergence(GridImage(4, 5, 1.0), GridImage(5, 4));
  for (std::size_t y = 0; y < 5; ++y)
    for (std::size_t x = 0; x < 5; ++x) {
      const double expect = x == 0 ? 1.0 : x == 4 ? -1.0 : 0.0;
      EXPECT_EQ(d(x, y), expect);
    }
}

TEST(Divergence, NegativeAdjointOfDifferences) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const std::size_t w = 3 + seed % 6, h = 2 + seed % 5;
    const auto u = oracle::random_image(seed, w, h, -1.0, 1.0);
    const auto v1 = oracle::random_image(seed + 1000, w - 1, h, -1.0, 1.0);
    const auto v2 = oracle::random_image(seed + 2000, w, h - 1, -1.0, 1.0);
    const auto d = forward_diff_matrices(w, h);
    const double lhs = (d.dx * as_vector(u)).dot(as_vector(v1)) +
                       (d.dy * as_vector(u)).dot(as_vector(v2));
    EXPECT_NEAR(lhs, -dot(u, divergence(v1, v2)), 1e-12);
  }
}

TEST(AnisoTv, TranslationInvariant) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inner = oracle::random_image(seed, 5, 4);
    const auto padded = pad(inner, 2, 0.0);
    GridImage shifted(padded.width(), padded.height());
    for (std::size_t y = 0; y < 4; ++y)
      for (std::size_t x = 0; x < 5; ++x)
        shifted(x + 3, y + 1) = inner(x, y);
    EXPECT_NEAR(aniso_tv(padded), aniso_tv(shifted), 1e-13);
  }
}

TEST(F1, Examples) {
  const auto f = single_pixel();
  EXPECT_EQ(f1_value(f, f, 7.0), 4.0);
  EXPECT_EQ(f1_value(GridImage(5, 5), f, 3.0), 3.0);
  const auto p = f1_parts(GridImage(5, 5), f, 3.0);
  EXPECT_EQ(p.tv, 0.0);
  EXPECT_EQ(p.fidelity, 3.0);
  EXPECT_THROW(f1_value(GridImage(4, 5), f, 1.0), std::invalid_argument);
  EXPECT_THROW(f1_value(f, f, -1.0), std::invalid_argument);
}

TEST(F2, Examples) {
  const auto f = block(8, 2, 3);
  EXPECT_EQ(f2_value(GridImage(8, 8), f, 2.0), 0.0);
  EXPECT_EQ(f2_value(f, f, 2.0), 12.0 - 2.0 * 9.0);
  const auto c = f2_cost(f);
  for (std::size_t i = 0; i < f.size(); ++i)
    EXPECT_EQ(c[i], f.values()[i] == 1.0 ? -1.0 : 1.0);
  EXPECT_THROW(f2_value(GridImage(8, 8, 1.1), f, 1.0), std::domain_error);
  EXPECT_NO_THROW(f2_value(GridImage(8, 8, 1.0 + 1e-7), f, 1.0));
}

TEST(F2, DiffersFromF1ByConstantOnBinaries) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto f = oracle::random_binary(seed, 5, 4).to_grid();
    const double mass = f1_parts(GridImage(5, 4), f, 1.0).fidelity;
    for (std::uint64_t s = 0; s < 10; ++s) {
      const auto v = oracle::random_binary(100 * seed + s, 5, 4).to_grid();
      EXPECT_NEAR(f2_value(v, f, 1.7) - f1_value(v, f, 1.7), -1.7 * mass, 1e-12);
    }
  }
}

TEST(F3, Examples) {
  const auto f = oracle::random_image(3, 6, 6);
  const auto u = oracle::random_image(4, 6, 6);
  EXPECT_EQ(f3_value(u, f, 2.5, HatKernel(1)), f1_value(u, f, 2.5));
  const HatKernel k(3);
  EXPECT_NEAR(f3_value(u, convolve_same(u, k), 2.5, k), aniso_tv(u), 1e-12);
  EXPECT_NEAR(f3_value(GridImage(6, 6), f, 2.5, k),
              2.5 * f1_parts(GridImage(6, 6), f, 1.0).fidelity, 1e-12);
}

} // namespace
} // namespace bcr
