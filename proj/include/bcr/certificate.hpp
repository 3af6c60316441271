#pragma once

// Dual vector fields that certify a bar code as the exact minimizer.
//
// For u = chi_S the field v must satisfy |v|_inf <= 1, have bounded
// divergence, and reproduce the total variation through
// -<u, div v> = TV(u). Any lambda_bar >= ||div v||_inf then makes u a
// minimizer of the L1-fidelity energy with f = u.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "bcr/barcode.hpp"
#include "bcr/functional.hpp"
#include "bcr/grid.hpp"

namespace bcr {

/// Staggered-grid field: v1 on horizontal edges ((w-1) x h), v2 on vertical
/// edges (w x (h-1)).
struct VectorField {
  GridImage v1;
  GridImage v2;

  static VectorField zero(std::size_t width, std::size_t height) {
    if (width < 2 || height < 2)
      throw std::invalid_argument("VectorField: grid must be at least 2x2");
    return {GridImage(width - 1, height), GridImage(width, height - 1)};
  }

  std::size_t width() const { return v2.width(); }
  std::size_t height() const { return v1.height(); }

  double inf_norm() const {
    double m = 0.0;
    for (double a : v1.values())
      m = std::max(m, std::abs(a));
    for (double a : v2.values())
      m = std::max(m, std::abs(a));
    return m;
  }
};

struct CertificateTolerances {
  double bound = 1e-9;
  double duality_rel = 1e-9;
  double lambda = 1e-9;
};

struct CertificateReport {
  double inf_norm_v = 0.0;
  double inf_norm_div = 0.0;
  double duality_lhs = 0.0; // -<u, div v>
  double tv_value = 0.0;
  double lambda_bound = 0.0; // == inf_norm_div
  double lambda_bar = 0.0;

  bool bounded = false;     // |v|_inf <= 1
  bool div_finite = false;  // div v is finite everywhere
  bool duality = false;     // -<u, div v> == TV(u)
  bool lambda_ok = false;   // lambda_bar >= ||div v||_inf

  bool passed() const { return bounded && div_finite && duality && lambda_ok; }

  void write_csv(std::ostream &os) const {
    os << "key,value\n"
       << "inf_norm_v," << inf_norm_v << '\n'
       << "inf_norm_div," << inf_norm_div << '\n'
       << "duality_lhs," << duality_lhs << '\n'
       << "tv_value," << tv_value << '\n'
       << "lambda_bound," << lambda_bound << '\n'
       << "lambda_bar," << lambda_bar << '\n'
       << "bounded," << bounded << '\n'
       << "div_finite," << div_finite << '\n'
       << "duality," << duality << '\n'
       << "lambda_ok," << lambda_ok << '\n'
       << "passed," << passed() << '\n';
  }
};

namespace detail {

// Fills one line of a certificate component. `diff(e)` is the forward
// difference across edge e of the line (edges 0..count-1); the field takes
// the value of the jump at each crossing, is linear in between, and decays
// to zero over at most `ramp` edges beyond the outermost crossings. Edge -1
// and edge `count` are the implicit zero edges outside the image.
template <class Diff, class Store>
void fill_certificate_line(std::size_t count, std::size_t ramp, Diff &&diff,
                           Store &&store) {
  std::vector<std::size_t> crossings;
  for (std::size_t e = 0; e < count; ++e)
    if (diff(e) != 0)
      crossings.push_back(e);
  if (crossings.empty())
    return;

  const auto first = crossings.front();
  const auto last = crossings.back();
  const double first_val = diff(first);
  const double last_val = diff(last);

  const std::size_t left = std::min(ramp, first + 1);
  for (std::size_t j = 0; j < left; ++j)
    store(first - j, first_val * (1.0 - static_cast<double>(j) / left));

  for (std::size_t i = 0; i + 1 < crossings.size(); ++i) {
    const auto a = crossings[i], b = crossings[i + 1];
    const double va = diff(a), vb = diff(b);
    const double gap = static_cast<double>(b - a);
    for (std::size_t e = a; e < b; ++e)
      store(e, va + (vb - va) * static_cast<double>(e - a) / gap);
  }

  const std::size_t right = std::min(ramp, count - last);
  for (std::size_t j = 0; j < right; ++j)
    store(last + j, last_val * (1.0 - static_cast<double>(j) / right));
}

} // namespace detail

/// Transcribes the per-line construction: along every row (column) the
/// horizontal (vertical) component equals +1 on left (top) faces of the
/// foreground, -1 on right (bottom) faces, is linear in between, and ramps
/// to zero outside. Slopes are at most 2/omega inside and 1/ramp outside,
/// where the ramp is omega_pixels edges, shortened to the available frame.
inline VectorField build_certificate(const Barcode &b) {
  const auto &u = b.image;
  if (u.width() < 2 || u.height() < 2)
    throw std::invalid_argument("build_certificate: image must be at least 2x2");
  if (u.count_ones() == 0)
    throw std::invalid_argument("build_certificate: empty bar code");
  if (frame_width(u) < 1)
    throw std::invalid_argument(
        "build_certificate: foreground must not touch the image border");
  const std::size_t omega = x_dimension(u);

  const std::size_t w = u.width(), h = u.height();
  VectorField v = VectorField::zero(w, h);
  for (std::size_t y = 0; y < h; ++y)
    detail::fill_certificate_line(
        w - 1, omega,
        [&](std::size_t e) { return int(u(e + 1, y)) - int(u(e, y)); },
        [&](std::size_t e, double val) { v.v1(e, y) = val; });
  for (std::size_t x = 0; x < w; ++x)
    detail::fill_certificate_line(
        h - 1, omega,
        [&](std::size_t e) { return int(u(x, e + 1)) - int(u(x, e)); },
        [&](std::size_t e, double val) { v.v2(x, e) = val; });
  return v;
}

inline CertificateReport verify_certificate(const GridImage &u,
                                            const VectorField &v,
                                            double lambda_bar,
                                            const CertificateTolerances &tol = {}) {
  if (v.width() != u.width() || v.height() != u.height() ||
      v.v1.width() + 1 != u.width() || v.v2.height() + 1 != u.height())
    throw std::invalid_argument("verify_certificate: grid mismatch");

  const GridImage div = divergence(v.v1, v.v2);
  CertificateReport r;
  r.lambda_bar = lambda_bar;
  r.inf_norm_v = v.inf_norm();
  r.div_finite = true;
  double pairing = 0.0;
  for (std::size_t i = 0; i < div.size(); ++i) {
    const double d = div.values()[i];
    if (!std::isfinite(d))
      r.div_finite = false;
    r.inf_norm_div = std::max(r.inf_norm_div, std::abs(d));
    pairing += u.values()[i] * d;
  }
  r.duality_lhs = -pairing;
  r.tv_value = aniso_tv(u);
  r.lambda_bound = r.inf_norm_div;

  r.bounded = r.inf_norm_v <= 1.0 + tol.bound;
  r.duality = std::abs(r.duality_lhs - r.tv_value) <=
              tol.duality_rel * std::max(1.0, r.tv_value);
  r.lambda_ok = r.div_finite && lambda_bar >= r.inf_norm_div - tol.lambda;
  return r;
}

inline CertificateReport verify_certificate(const BinaryImage &u,
                                            const VectorField &v,
                                            double lambda_bar,
                                            const CertificateTolerances &tol = {}) {
  return verify_certificate(u.to_grid(), v, lambda_bar, tol);
}

} // namespace bcr
