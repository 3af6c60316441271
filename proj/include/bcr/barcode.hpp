#pragma once

// Random matrix bar codes and their X-dimension.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "bcr/grid.hpp"
#include "bcr/rng.hpp"

namespace bcr {

struct BarcodeSpec {
  std::size_t modules_x = 4;
  std::size_t modules_y = 4;
  std::size_t pixels_per_module = 8;
  std::size_t margin_modules = 1;
  double fill_density = 0.5;
  std::uint64_t seed = 0;
};

/// Length of the shortest run in any row or column, counting runs of ones
/// and runs of zeros. Zero runs that touch the image border are skipped:
/// they belong to the unbounded white background, not to the code.
inline std::size_t x_dimension(const BinaryImage &img) {
  if (img.count_ones() == 0)
    throw std::invalid_argument("x_dimension: image has no foreground");

  std::size_t best = std::numeric_limits<std::size_t>::max();
  auto scan = [&](std::size_t length, auto &&at) {
    std::size_t start = 0;
    while (start < length) {
      const auto value = at(start);
      std::size_t end = start + 1;
      while (end < length && at(end) == value)
        ++end;
      const bool touches_border = start == 0 || end == length;
      if (value == 1 || !touches_border)
        best = std::min(best, end - start);
      start = end;
    }
  };
  for (std::size_t y = 0; y < img.height(); ++y)
    scan(img.width(), [&](std::size_t x) { return img(x, y); });
  for (std::size_t x = 0; x < img.width(); ++x)
    scan(img.height(), [&](std::size_t y) { return img(x, y); });
  return best;
}

inline bool is_in_B_omega(const BinaryImage &img, std::size_t omega) {
  if (omega < 1)
    throw std::invalid_argument("is_in_B_omega: omega must be >= 1");
  return img.count_ones() > 0 && x_dimension(img) >= omega;
}

/// Number of all-zero rows/columns between the foreground and the nearest
/// image edge. Zero for an empty image.
inline std::size_t frame_width(const BinaryImage &img) {
  std::size_t best = std::numeric_limits<std::size_t>::max();
  bool any = false;
  for (std::size_t y = 0; y < img.height(); ++y)
    for (std::size_t x = 0; x < img.width(); ++x)
      if (img(x, y)) {
        any = true;
        best = std::min({best, x, y, img.width() - 1 - x, img.height() - 1 - y});
      }
  return any ? best : 0;
}

struct Barcode {
  BinaryImage image;
  std::size_t omega_pixels = 0;

  /// Wraps an image, recomputing its X-dimension.
  static Barcode from_image(BinaryImage img) {
    const auto omega = x_dimension(img);
    return Barcode{std::move(img), omega};
  }
};

/// Draws every module independently black with probability fill_density.
/// An all-white draw is redrawn from the next stream until something is black.
inline Barcode generate(const BarcodeSpec &spec) {
  if (spec.modules_x < 1 || spec.modules_y < 1 || spec.pixels_per_module < 1)
    throw std::invalid_argument("generate: module counts and size must be >= 1");
  if (spec.margin_modules < 1)
    throw std::invalid_argument("generate: margin_modules must be >= 1");
  if (!(spec.fill_density > 0.0 && spec.fill_density <= 1.0))
    throw std::invalid_argument("generate: fill_density must lie in (0,1]");

  const std::size_t p = spec.pixels_per_module;
  const std::size_t w = (spec.modules_x + 2 * spec.margin_modules) * p;
  const std::size_t h = (spec.modules_y + 2 * spec.margin_modules) * p;
  const std::size_t modules = spec.modules_x * spec.modules_y;

  for (std::uint64_t attempt = 0;; ++attempt) {
    const CounterRng rng(spec.seed, attempt);
    BinaryImage img(w, h);
    bool any = false;
    for (std::size_t m = 0; m < modules; ++m) {
      if (rng.uniform(m) >= spec.fill_density)
        continue;
      any = true;
      const std::size_t mx = m % spec.modules_x + spec.margin_modules;
      const std::size_t my = m / spec.modules_x + spec.margin_modules;
      for (std::size_t y = my * p; y < (my + 1) * p; ++y)
        for (std::size_t x = mx * p; x < (mx + 1) * p; ++x)
          img.set(x, y, true);
    }
    if (any)
      return Barcode::from_image(std::move(img));
  }
}

/// Replicates every pixel into an s-by-s block.
inline BinaryImage upsample(const BinaryImage &img, std::size_t s) {
  BinaryImage out(img.width() * s, img.height() * s);
  for (std::size_t y = 0; y < out.height(); ++y)
    for (std::size_t x = 0; x < out.width(); ++x)
      out.set(x, y, img(x / s, y / s));
  return out;
}

} // namespace bcr
