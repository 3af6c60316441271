#pragma once

// Hat-kernel blur, additive Gaussian noise and signal-to-noise ratio.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/SparseCore>

#include "bcr/grid.hpp"
#include "bcr/rng.hpp"

namespace bcr {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Normalized separable hat kernel of radius r.
///
/// The 1D profile is (1, 2, ..., r, ..., 2, 1) / r^2 and the 2D kernel is its
/// outer product with itself, so the 2r-1 by 2r-1 weights are stored as
/// integer numerators over r^4 and always sum to exactly one.
class HatKernel {
public:
  explicit HatKernel(int radius = 1) : radius_(radius) {
    if (radius < 1)
      throw std::invalid_argument("HatKernel: radius must be >= 1");
  }

  int radius() const { return radius_; }
  int extent() const { return 2 * radius_ - 1; }

  /// Integer 1D numerator at offset d in [-(r-1), r-1].
  long long profile_numerator(int d) const { return radius_ - std::abs(d); }

  long long denominator() const {
    const long long r = radius_;
    return r * r * r * r;
  }

  /// Weight at offset (dx, dy), each in [-(r-1), r-1].
  double weight(int dx, int dy) const {
    if (std::abs(dx) >= radius_ || std::abs(dy) >= radius_)
      return 0.0;
    return static_cast<double>(profile_numerator(dx) * profile_numerator(dy)) /
           static_cast<double>(denominator());
  }

  /// 1D profile, already normalized.
  std::vector<double> profile() const {
    std::vector<double> p;
    const double r2 = static_cast<double>(radius_) * radius_;
    for (int d = -(radius_ - 1); d <= radius_ - 1; ++d)
      p.push_back(profile_numerator(d) / r2);
    return p;
  }

  bool is_identity() const { return radius_ == 1; }

private:
  int radius_;
};

inline HatKernel hat_kernel(int r) { return HatKernel(r); }

struct NoiseSpec {
  double amplitude = 0.0; // standard deviation
  std::uint64_t seed = 0;
};

/// Zero-padded convolution with output the same size as the input.
inline GridImage convolve_same(const GridImage &img, const HatKernel &k) {
  if (k.is_identity())
    return img;
  const int r = k.radius() - 1;
  const auto w = static_cast<long>(img.width());
  const auto h = static_cast<long>(img.height());
  GridImage out(img.width(), img.height(), 0.0, img.spacing());
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int b = -r; b <= r; ++b) {
        const long sy = y - b;
        if (sy < 0 || sy >= h)
          continue;
        for (int a = -r; a <= r; ++a) {
          const long sx = x - a;
          if (sx < 0 || sx >= w)
            continue;
          acc += k.weight(a, b) * img(sx, sy);
        }
      }
      out(x, y) = acc;
    }
  }
  return out;
}

/// Matrix C with C * vec(img) == vec(convolve_same(img, k)), row-major
/// vectorization on both sides.
inline SparseMatrix convolution_matrix(const HatKernel &k, std::size_t width,
                                       std::size_t height) {
  const auto n = static_cast<Eigen::Index>(width * height);
  const int r = k.radius() - 1;
  const auto w = static_cast<long>(width);
  const auto h = static_cast<long>(height);
  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(n) * k.extent() * k.extent());
  for (long y = 0; y < h; ++y)
    for (long x = 0; x < w; ++x)
      for (int b = -r; b <= r; ++b) {
        const long sy = y - b;
        if (sy < 0 || sy >= h)
          continue;
        for (int a = -r; a <= r; ++a) {
          const long sx = x - a;
          if (sx < 0 || sx >= w)
            continue;
          entries.emplace_back(y * w + x, sy * w + sx, k.weight(a, b));
        }
      }
  SparseMatrix m(n, n);
  m.setFromTriplets(entries.begin(), entries.end());
  return m;
}

/// out = in + a * Z with Z drawn from the counter-based normal stream.
inline GridImage add_gaussian_noise(const GridImage &img, const NoiseSpec &spec) {
  if (spec.amplitude < 0.0)
    throw std::invalid_argument("add_gaussian_noise: amplitude must be >= 0");
  if (spec.amplitude == 0.0)
    return img;
  const CounterRng rng(spec.seed, /*stream=*/1);
  GridImage out = img;
  auto v = out.values();
  for (std::size_t i = 0; i < v.size(); i += 2) {
    auto [z0, z1] = rng.normal_pair(i / 2);
    v[i] += spec.amplitude * z0;
    if (i + 1 < v.size())
      v[i + 1] += spec.amplitude * z1;
  }
  return out;
}

/// 10 log10(sum clean^2 / sum (noisy - clean)^2). Returns +inf when the two
/// images coincide.
inline double snr_db(const GridImage &clean, const GridImage &noisy) {
  if (!clean.same_shape(noisy))
    throw std::invalid_argument("snr_db: shape mismatch");
  double signal = 0.0, noise = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const double c = clean.values()[i];
    const double d = noisy.values()[i] - c;
    signal += c * c;
    noise += d * d;
  }
  if (signal == 0.0)
    throw std::domain_error("snr_db: zero signal power");
  if (noise == 0.0)
    return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(signal / noise);
}

} // namespace bcr
