#include <gtest/gtest.h>

#include <sstream>

#include "bcr/barcode.hpp"
#include "bcr/restore.hpp"
#include "oracles.hpp"

namespace bcr {
namespace {

Barcode code(std::uint64_t seed, std::size_t ppm = 8) {
  BarcodeSpec spec;
  spec.pixels_per_module = ppm;
  spec.seed = seed;
  return generate(spec);
}

RestoreOptions with_reference(const BinaryImage &ref) {
  RestoreOptions opt;
  opt.reference = ref;
  return opt;
}

TEST(PixelError, Examples) {
  const auto a = oracle::random_binary(1, 24, 24);
  EXPECT_EQ(pixel_error(a, a), 0.0);
  BinaryImage flipped = a, complement(24, 24);
  flipped.set(3, 4, !a(3, 4));
  for (std::size_t y = 0; y < 24; ++y)
    for (std::size_t x = 0; x < 24; ++x)
      complement.set(x, y, !a(x, y));
  EXPECT_EQ(pixel_error(a, flipped), 1.0 / 576.0);
  EXPECT_EQ(pixel_error(a, complement), 1.0);
  EXPECT_THROW(pixel_error(a, BinaryImage(24, 23)), std::invalid_argument);
}

TEST(Method, Parse) {
  EXPECT_EQ(parse_method("f1"), Method::f1);
  EXPECT_EQ(parse_method("f3"), Method::f3);
  EXPECT_STREQ(to_string(Method::f2), "f2");
  EXPECT_THROW(parse_method("f4"), std::invalid_argument);
}

TEST(DenoiseF1, CleanCodeRecovered) {
  const auto b = code(7);
  const auto f = b.image.to_grid();
  const auto r = denoise_f1(f, 2.0, with_reference(b.image));
  EXPECT_LE(max_abs_difference(r.output, f), 1e-6);
  EXPECT_EQ(*r.pixel_error, 0.0);
  EXPECT_EQ(r.solver.status, LpStatus::optimal);
}

TEST(DenoiseF1, TrivialRegime) {
  const auto f = code(7).image.to_grid();
  const auto r = denoise_f1(f, 0.01);
  EXPECT_LE(max_abs_difference(r.output, GridImage(f.width(), f.height())), 1e-6);
  EXPECT_EQ(r.binary_output.count_ones(), 0u);
}

TEST(DenoiseF1, ObjectiveMatchesEnergy) {
  const auto f = add_gaussian_noise(code(2, 4).image.to_grid(), {0.3, 5});
  for (double lb : {0.3, 1.0, 3.0}) {
    const auto r = denoise_f1(f, lb);
    EXPECT_NEAR(r.objective, r.energy.total(), 1e-6 * std::max(1.0, r.objective));
    const auto r2 = denoise_f2(f, lb);
    EXPECT_NEAR(r2.objective, r2.energy.total(), 1e-6 * std::max(1.0, std::abs(r2.objective)));
  }
}

TEST(DenoiseF1, OutputIsMinimizerOfItsOwnProblem) {
  // Noisy data can have a whole face of minimizers, so the re-solve may land
  // on another point of that face; the energies must agree.
  for (double lb : {0.5, 1.5, 3.0}) {
    const auto f = add_gaussian_noise(code(4, 4).image.to_grid(), {0.25, 3});
    const auto first = denoise_f1(f, lb);
    const auto second = denoise_f1(first.output, lb);
    const double e_first = f1_value(first.output, first.output, lb);
    EXPECT_NEAR(second.objective, e_first, 1e-6 * e_first) << "lambda " << lb;
  }
}

TEST(DenoiseF1, FixedPointWhenUnique) {
  const auto clean = code(4, 4).image.to_grid();
  const auto a = denoise_f1(clean, 2.0);
  EXPECT_LE(max_abs_difference(denoise_f1(a.output, 2.0).output, a.output), 1e-6);

  const auto f = add_gaussian_noise(clean, {0.25, 3});
  const auto b = denoise_f1(f, 6.0);
  EXPECT_LE(max_abs_difference(denoise_f1(b.output, 6.0).output, b.output), 1e-6);
}

TEST(DenoiseF2, CleanCodeExact) {
  const auto b = code(11);
  const auto r = denoise_f2(b.image.to_grid(), 2.0, with_reference(b.image));
  EXPECT_EQ(r.binary_output, b.image);
}

class NoisyComparison : public ::testing::TestWithParam<std::pair<double, double>> {};

TEST_P(NoisyComparison, F2NearlyPerfectAndBeatsF1) {
  const auto [amplitude, bound] = GetParam();
  const auto b = code(7);
  const auto f = add_gaussian_noise(b.image.to_grid(), {amplitude, 1});
  const auto r2 = denoise_f2(f, 2.0, with_reference(b.image));
  const auto r1 = denoise_f1(f, 75.0, with_reference(b.image));
  EXPECT_LE(*r2.pixel_error, bound);
  EXPECT_GT(*r1.pixel_error, *r2.pixel_error);
}

INSTANTIATE_TEST_SUITE_P(Amplitudes, NoisyComparison,
                         ::testing::Values(std::pair{0.2, 0.01}, std::pair{0.35, 0.02}));

TEST(DeblurF3, IdentityKernelIsF1) {
  const auto f = add_gaussian_noise(code(3, 4).image.to_grid(), {0.2, 9});
  const auto a = deblur_f3(f, 1.2, HatKernel(1));
  const auto b = denoise_f1(f, 1.2);
  EXPECT_EQ(a.output, b.output);
  EXPECT_EQ(a.binary_output, b.binary_output);
  EXPECT_EQ(a.objective, b.objective);
}

TEST(DeblurF3, SmallBlurRecovered) {
  const auto b = code(5, 4);
  const HatKernel k(3);
  const auto f = convolve_same(b.image.to_grid(), k);
  const auto r = deblur_f3(f, 8.0, k, with_reference(b.image));
  EXPECT_EQ(*r.pixel_error, 0.0);
  EXPECT_NEAR(r.objective, r.energy.total(), 1e-6 * std::max(1.0, r.objective));
}

TEST(Restore, RejectsBadThreshold) {
  RestoreOptions opt;
  opt.threshold = 1.0;
  EXPECT_THROW(denoise_f2(GridImage(3, 3), 1.0, opt), std::invalid_argument);
}

TEST(Restore, SolverFailureRaises) {
  RestoreOptions opt;
  opt.solver.max_iterations = 1;
  try {
    denoise_f1(oracle::random_image(1, 6, 6), 1.0, opt);
    FAIL() << "expected RestoreError";
  } catch (const RestoreError &e) {
    EXPECT_EQ(e.status, LpStatus::max_iterations);
  }
}

TEST(Sweep, CleanCodeErrorShrinksToZero) {
  const auto b = code(7, 4);
  const std::vector<double> lambdas{0.01, 0.1, 0.5, 1.0, 2.0, 4.0};
  const auto entries = sweep_lambda(b.image.to_grid(), Method::f1, lambdas, HatKernel(1),
                                    with_reference(b.image));
  ASSERT_EQ(entries.size(), lambdas.size());
  EXPECT_EQ(entries.front().report->binary_output.count_ones(), 0u);
  EXPECT_LE(max_abs_difference(entries.front().report->output,
                               GridImage(b.image.width(), b.image.height())),
            1e-6);
  for (std::size_t i = 1; i < entries.size(); ++i)
    EXPECT_LE(*entries[i].report->pixel_error, *entries[i - 1].report->pixel_error);
  EXPECT_EQ(*entries.back().report->pixel_error, 0.0);
}

TEST(Sweep, DuplicatesAreIdentical) {
  const auto f = add_gaussian_noise(code(1, 4).image.to_grid(), {0.2, 2});
  const auto e = sweep_lambda(f, Method::f2, {1.0, 1.0});
  EXPECT_EQ(e[0].report->output, e[1].report->output);
  EXPECT_EQ(e[0].report->objective, e[1].report->objective);
}

TEST(Sweep, RecordsErrorsAndContinues) {
  RestoreOptions opt;
  opt.threshold = 0.5;
  const auto f = code(1, 2).image.to_grid();
  const auto e = sweep_lambda(f, Method::f1, {-1.0, 1.0}, HatKernel(1), opt);
  ASSERT_EQ(e.size(), 2u);
  EXPECT_FALSE(e[0].report);
  EXPECT_FALSE(e[0].error.empty());
  EXPECT_TRUE(e[1].report);
  EXPECT_THROW(sweep_lambda(f, Method::f1, {}), std::invalid_argument);

  std::ostringstream os;
  write_sweep_csv(os, e);
  EXPECT_EQ(os.str().rfind("lambda_bar,status,objective,tv,fidelity,pixel_error,iterations\n", 0),
            0u);
  EXPECT_NE(os.str().find("error"), std::string::npos);
}

TEST(Relaxation, BinaryOptimumMatchesShiftedRelaxation) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto f = oracle::random_binary(seed, 4, 4, 0.4).to_grid();
    const double lb = 0.3 + 0.45 * static_cast<double>(seed);
    const auto best = brute_force_binary(f, lb);
    const double mass = f1_parts(GridImage(4, 4), f, 1.0).fidelity;
    const auto relaxed = denoise_f2(f, lb);
    EXPECT_NEAR(f1_value(best.to_grid(), f, lb), relaxed.objective + lb * mass, 1e-6)
        << "seed " << seed;
  }
}

TEST(Scaling, ReplicationWithScaledLambda) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto b = code(seed, 2);
    const auto big = upsample(b.image, 2);
    for (double lb : {0.01, 3.0}) {
      const auto small_r = denoise_f1(b.image.to_grid(), lb);
      const auto big_r = denoise_f1(big.to_grid(), lb / 2.0);
      EXPECT_EQ(big_r.binary_output, upsample(small_r.binary_output, 2))
          << "seed " << seed << " lambda " << lb;
    }
  }
}

TEST(Report, CsvHasStableKeys) {
  const auto r = denoise_f2(code(2, 2).image.to_grid(), 2.0);
  std::ostringstream os;
  write_report_csv(os, r);
  std::istringstream is(os.str());
  std::string line, keys;
  while (std::getline(is, line))
    keys += line.substr(0, line.find(',')) + ' ';
  EXPECT_EQ(keys, "key method lambda_bar blur_radius threshold objective tv fidelity "
                  "pixel_error status iterations primal_residual dual_residual "
                  "duality_gap ");
}

} // namespace
} // namespace bcr
