#pragma once

// Forward differences, total variation, the discrete divergence and the
// three restoration energies.
//
// The grid spacing h is dropped everywhere: differences are plain
// U(x+1,y) - U(x,y) and sums carry no quadrature weight. With lambda_bar =
// lambda * h the continuum quantities are recovered as
//   TV_cont       ~= h   * aniso_tv(U)
//   fidelity_cont ~= h^2 * sum |U - F|.
//
// Edge fields use a staggered layout. A horizontal field (v1) lives on the
// (width-1) x height edges between horizontally adjacent pixels, a vertical
// field (v2) on the width x (height-1) edges between vertically adjacent
// pixels, both stored as GridImage in row-major order.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/SparseCore>

#include "bcr/degrade.hpp"
#include "bcr/grid.hpp"

namespace bcr {

struct DiffOperators {
  SparseMatrix dx; // (width-1)*height rows
  SparseMatrix dy; // width*(height-1) rows
};

/// Row (x, y) of dx is U(x+1,y) - U(x,y), indexed y*(width-1)+x.
/// Row (x, y) of dy is U(x,y+1) - U(x,y), indexed y*width+x.
inline DiffOperators forward_diff_matrices(std::size_t width, std::size_t height) {
  if (width < 2 || height < 2)
    throw std::invalid_argument("forward_diff_matrices: dimensions must be >= 2");
  const auto n = static_cast<Eigen::Index>(width * height);
  const auto m1 = static_cast<Eigen::Index>((width - 1) * height);
  const auto m2 = static_cast<Eigen::Index>(width * (height - 1));

  std::vector<Triplet> tx, ty;
  tx.reserve(2 * m1);
  ty.reserve(2 * m2);
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x + 1 < width; ++x) {
      const auto row = static_cast<Eigen::Index>(y * (width - 1) + x);
      tx.emplace_back(row, y * width + x + 1, 1.0);
      tx.emplace_back(row, y * width + x, -1.0);
    }
  for (std::size_t y = 0; y + 1 < height; ++y)
    for (std::size_t x = 0; x < width; ++x) {
      const auto row = static_cast<Eigen::Index>(y * width + x);
      ty.emplace_back(row, (y + 1) * width + x, 1.0);
      ty.emplace_back(row, y * width + x, -1.0);
    }
  DiffOperators ops{SparseMatrix(m1, n), SparseMatrix(m2, n)};
  ops.dx.setFromTriplets(tx.begin(), tx.end());
  ops.dy.setFromTriplets(ty.begin(), ty.end());
  return ops;
}

inline Eigen::Map<const Eigen::VectorXd> as_vector(const GridImage &img) {
  return {img.values().data(), static_cast<Eigen::Index>(img.size())};
}

/// ||dx U||_1 + ||dy U||_1.
inline double aniso_tv(const GridImage &img) {
  double tv = 0.0;
  for (std::size_t y = 0; y < img.height(); ++y)
    for (std::size_t x = 0; x < img.width(); ++x) {
      if (x + 1 < img.width())
        tv += std::abs(img(x + 1, y) - img(x, y));
      if (y + 1 < img.height())
        tv += std::abs(img(x, y + 1) - img(x, y));
    }
  return tv;
}

/// Sum over pixels of the Euclidean norm of the forward-difference gradient.
/// A difference that would leave the image counts as zero.
inline double iso_tv(const GridImage &img) {
  double tv = 0.0;
  for (std::size_t y = 0; y < img.height(); ++y)
    for (std::size_t x = 0; x < img.width(); ++x) {
      const double gx = x + 1 < img.width() ? img(x + 1, y) - img(x, y) : 0.0;
      const double gy = y + 1 < img.height() ? img(x, y + 1) - img(x, y) : 0.0;
      tv += std::hypot(gx, gy);
    }
  return tv;
}

/// -(dx^T v1 + dy^T v2) on the pixel grid.
inline GridImage divergence(const GridImage &v1, const GridImage &v2) {
  const std::size_t w = v2.width();
  const std::size_t h = v1.height();
  if (v1.width() + 1 != w || v2.height() + 1 != h)
    throw std::invalid_argument(
        "divergence: v1 must be (w-1) x h and v2 must be w x (h-1)");
  GridImage div(w, h, 0.0, v1.spacing());
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      double d = 0.0;
      if (x + 1 < w)
        d += v1(x, y);
      if (x > 0)
        d -= v1(x - 1, y);
      if (y + 1 < h)
        d += v2(x, y);
      if (y > 0)
        d -= v2(x, y - 1);
      div(x, y) = d;
    }
  return div;
}

/// Value of an energy split into its regularization and data terms.
struct EnergyParts {
  double tv = 0.0;
  double fidelity = 0.0; // already multiplied by lambda_bar
  double total() const { return tv + fidelity; }
};

namespace detail {
inline void require_same_shape(const GridImage &a, const GridImage &b,
                               const char *who) {
  if (!a.same_shape(b))
    throw std::invalid_argument(std::string(who) + ": shape mismatch");
}
} // namespace detail

inline EnergyParts f1_parts(const GridImage &u, const GridImage &f,
                            double lambda_bar) {
  detail::require_same_shape(u, f, "f1_value");
  if (lambda_bar < 0.0)
    throw std::invalid_argument("f1_value: lambda_bar must be >= 0");
  double fid = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    fid += std::abs(u.values()[i] - f.values()[i]);
  return {aniso_tv(u), lambda_bar * fid};
}

/// aniso_tv(u) + lambda_bar * sum |u - f|.
inline double f1_value(const GridImage &u, const GridImage &f, double lambda_bar) {
  return f1_parts(u, f, lambda_bar).total();
}

/// Pixelwise linear cost |1 - f| - |f| of the relaxed binary problem.
inline std::vector<double> f2_cost(const GridImage &f) {
  std::vector<double> c(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double fi = f.values()[i];
    c[i] = std::abs(1.0 - fi) - std::abs(fi);
  }
  return c;
}

inline constexpr double kBoxTolerance = 1e-6;

inline EnergyParts f2_parts(const GridImage &v, const GridImage &f,
                            double lambda_bar) {
  detail::require_same_shape(v, f, "f2_value");
  const auto c = f2_cost(f);
  double lin = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double vi = v.values()[i];
    if (vi < -kBoxTolerance || vi > 1.0 + kBoxTolerance)
      throw std::domain_error("f2_value: v must lie in [0,1]");
    lin += c[i] * vi;
  }
  return {aniso_tv(v), lambda_bar * lin};
}

/// aniso_tv(v) + lambda_bar * sum (|1-f| - |f|) v, for v in [0,1].
inline double f2_value(const GridImage &v, const GridImage &f, double lambda_bar) {
  return f2_parts(v, f, lambda_bar).total();
}

inline EnergyParts f3_parts(const GridImage &u, const GridImage &f,
                            double lambda_bar, const HatKernel &k) {
  detail::require_same_shape(u, f, "f3_value");
  const double fid = f1_parts(convolve_same(u, k), f, lambda_bar).fidelity;
  return {aniso_tv(u), fid};
}

/// aniso_tv(u) + lambda_bar * sum |K u - f|.
inline double f3_value(const GridImage &u, const GridImage &f, double lambda_bar,
                       const HatKernel &k) {
  return f3_parts(u, f, lambda_bar, k).total();
}

} // namespace bcr
