#pragma once

// Runtime checks shared by the CLI `selftest` and `oracle-check` commands.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "bcr/barcode.hpp"
#include "bcr/certificate.hpp"
#include "bcr/degrade.hpp"
#include "bcr/functional.hpp"
#include "bcr/grid.hpp"
#include "bcr/lp.hpp"
#include "bcr/restore.hpp"
#include "bcr/rng.hpp"

namespace bcr {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct OracleCheckConfig {
  std::size_t max_pixels = 16;
  int trials = 20;
  std::uint64_t seed = 1;
  double noise = 0.25;
  double lambda_min = 0.25;
  double lambda_max = 3.0;
  double tolerance = 1e-6;
};

struct OracleTrial {
  double lambda_bar = 0.0;
  double relaxed_energy = 0.0; // F1 of the thresholded relaxed minimizer
  double exact_energy = 0.0;   // F1 of the exhaustive binary minimizer
  bool passed = false;
};

/// Random binary image plus Gaussian noise, sized to fit max_pixels.
inline GridImage oracle_input(const OracleCheckConfig &cfg, int trial) {
  const auto side = static_cast<std::size_t>(
      std::floor(std::sqrt(static_cast<double>(cfg.max_pixels))));
  if (side < 2)
    throw std::invalid_argument("oracle-check: max_pixels must be >= 4");
  const CounterRng rng(cfg.seed, 0x6f7261636c65ull + static_cast<std::uint64_t>(trial));
  GridImage f(side, side);
  for (std::size_t i = 0; i < f.size(); ++i)
    f.values()[i] = rng.uniform(i) < 0.5 ? 1.0 : 0.0;
  return add_gaussian_noise(f, {cfg.noise, cfg.seed * 1000003u + static_cast<std::uint64_t>(trial)});
}

inline double oracle_lambda(const OracleCheckConfig &cfg, int trial) {
  const CounterRng rng(cfg.seed, 0x6c616d626461ull + static_cast<std::uint64_t>(trial));
  return cfg.lambda_min + (cfg.lambda_max - cfg.lambda_min) * rng.uniform(0);
}

/// Thresholding the relaxed minimizer must reach the binary optimum found
/// by enumeration.
inline std::vector<OracleTrial> oracle_check(const OracleCheckConfig &cfg) {
  std::vector<OracleTrial> out;
  for (int t = 0; t < cfg.trials; ++t) {
    const GridImage f = oracle_input(cfg, t);
    const double lb = oracle_lambda(cfg, t);
    const auto relaxed = denoise_f2(f, lb);
    const auto exact = brute_force_binary(f, lb);
    OracleTrial r;
    r.lambda_bar = lb;
    r.relaxed_energy = f1_value(relaxed.binary_output.to_grid(), f, lb);
    r.exact_energy = f1_value(exact.to_grid(), f, lb);
    r.passed = r.relaxed_energy <= r.exact_energy + cfg.tolerance;
    out.push_back(r);
  }
  return out;
}

/// Fast invariant sweep over every module.
inline std::vector<CheckResult> selftest(std::uint64_t seed = 12345) {
  std::vector<CheckResult> results;
  auto record = [&](std::string name, bool ok, std::string detail = {}) {
    results.push_back({std::move(name), ok, std::move(detail)});
  };
  const CounterRng rng(seed, 99);
  std::uint64_t draw = 0;
  auto random_image = [&](std::size_t w, std::size_t h) {
    GridImage img(w, h);
    for (double &v : img.values())
      v = rng.uniform(draw++);
    return img;
  };

  {
    const GridImage img = random_image(7, 5);
    const auto back = read_pgm(write_pgm(img, 65535));
    record("pgm_roundtrip_65535", max_abs_difference(img, back) <= 0.5 / 65535 + 1e-15);
  }
  {
    bool ok = true;
    for (int r = 1; r <= 6; ++r) {
      const HatKernel k(r);
      long long num = 0;
      for (int a = -(r - 1); a <= r - 1; ++a)
        for (int b = -(r - 1); b <= r - 1; ++b)
          num += k.profile_numerator(a) * k.profile_numerator(b);
      ok = ok && num == k.denominator();
    }
    record("hat_kernel_unit_mass", ok);
  }
  {
    const GridImage img = random_image(9, 7);
    const HatKernel k(3);
    const auto c = convolution_matrix(k, img.width(), img.height());
    const Eigen::VectorXd lhs = c * as_vector(img);
    const auto rhs = convolve_same(img, k);
    record("convolution_matrix_matches", (lhs - as_vector(rhs)).lpNorm<Eigen::Infinity>() <= 1e-14);
  }
  {
    const GridImage u = random_image(6, 5);
    const GridImage v1 = random_image(5, 5), v2 = random_image(6, 4);
    const auto ops = forward_diff_matrices(6, 5);
    const double lhs = (ops.dx * as_vector(u)).dot(as_vector(v1)) +
                       (ops.dy * as_vector(u)).dot(as_vector(v2));
    const double rhs = as_vector(u).dot(as_vector(divergence(v1, v2)));
    record("divergence_adjoint", std::abs(lhs + rhs) <= 1e-12);
  }
  {
    GridImage img(8, 8);
    for (std::size_t i = 0; i < img.size(); ++i)
      img.values()[i] = static_cast<double>(rng.bits(draw++) % 6);
    double levels = 0.0;
    for (int t = 0; t < 5; ++t) {
      GridImage ind(8, 8);
      for (std::size_t i = 0; i < img.size(); ++i)
        ind.values()[i] = img.values()[i] > t ? 1.0 : 0.0;
      levels += aniso_tv(ind);
    }
    record("coarea", std::abs(levels - aniso_tv(img)) <= 1e-9);
  }
  {
    const GridImage img = random_image(10, 10);
    const double iso = iso_tv(img), aniso = aniso_tv(img);
    record("seminorm_equivalence",
           iso <= aniso + 1e-12 && aniso <= std::numbers::sqrt2 * iso + 1e-12);
  }
  {
    BarcodeSpec spec;
    spec.modules_x = spec.modules_y = 3;
    spec.pixels_per_module = 4;
    spec.seed = seed;
    const auto code = generate(spec);
    const auto v = build_certificate(code);
    const auto rep = verify_certificate(code.image, v, 4.0 / 4);
    std::ostringstream d;
    d << "div=" << rep.inf_norm_div;
    record("certificate", rep.passed() && rep.inf_norm_div <= 1.0 + 1e-9, d.str());
  }
  {
    StandardLp lp;
    lp.a_eq.resize(1, 2);
    lp.a_eq.insert(0, 0) = 1.0;
    lp.a_eq.insert(0, 1) = 1.0;
    lp.b_eq = Eigen::VectorXd::Ones(1);
    lp.cost = Eigen::VectorXd::Ones(2);
    lp.lower = Eigen::VectorXd::Zero(2);
    lp.upper = Eigen::VectorXd::Constant(2, kInf);
    const auto sol = solve(lp);
    record("lp_simple", sol.status == LpStatus::optimal && std::abs(sol.objective - 1.0) <= 1e-7);
  }
  {
    BarcodeSpec spec;
    spec.modules_x = spec.modules_y = 2;
    spec.pixels_per_module = 4;
    spec.seed = seed;
    const auto code = generate(spec);
    const auto f = code.image.to_grid();
    const auto r = denoise_f1(f, 2.0);
    record("f1_clean_recovery", max_abs_difference(r.output, f) <= 1e-6);
  }
  {
    OracleCheckConfig cfg;
    cfg.trials = 3;
    cfg.max_pixels = 9;
    cfg.seed = seed;
    bool ok = true;
    for (const auto &t : oracle_check(cfg))
      ok = ok && t.passed;
    record("relaxation_oracle", ok);
  }
  return results;
}

} // namespace bcr
