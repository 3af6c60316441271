#pragma once

// Restoration pipelines: solve the LP for one of the energies, read back
// the image, threshold, and report.

#include <cstddef>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bcr/degrade.hpp"
#include "bcr/functional.hpp"
#include "bcr/grid.hpp"
#include "bcr/lp.hpp"

namespace bcr {

enum class Method { f1, f2, f3 };

inline const char *to_string(Method m) {
  switch (m) {
  case Method::f1:
    return "f1";
  case Method::f2:
    return "f2";
  case Method::f3:
    return "f3";
  }
  return "?";
}

inline Method parse_method(std::string_view s) {
  if (s == "f1")
    return Method::f1;
  if (s == "f2")
    return Method::f2;
  if (s == "f3")
    return Method::f3;
  throw std::invalid_argument("unknown method '" + std::string(s) + "'");
}

class RestoreError : public std::runtime_error {
public:
  RestoreError(const std::string &what, LpStatus status)
      : std::runtime_error(what), status(status) {}
  LpStatus status;
};

struct RestoreOptions {
  double threshold = 0.5;
  SolverTolerances solver{};
  std::optional<BinaryImage> reference; // for pixel_error
};

struct SolverStats {
  LpStatus status = LpStatus::optimal;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double duality_gap = 0.0;
};

struct RestoreReport {
  Method method = Method::f1;
  double lambda_bar = 0.0;
  int blur_radius = 1;
  double threshold = 0.5;
  GridImage output;
  BinaryImage binary_output;
  double objective = 0.0; // LP optimum
  EnergyParts energy;     // energy re-evaluated at `output`
  std::optional<double> pixel_error;
  SolverStats solver;
};

/// Fraction of pixels where a and b differ.
inline double pixel_error(const BinaryImage &a, const BinaryImage &b) {
  if (!a.same_shape(b))
    throw std::invalid_argument("pixel_error: shape mismatch");
  std::size_t diff = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    diff += a.bits()[i] != b.bits()[i];
  return static_cast<double>(diff) / static_cast<double>(a.size());
}

namespace detail {

inline RestoreReport run_restore(Method method, const ImageLp &problem,
                                 const GridImage &f, double lambda_bar,
                                 const HatKernel &k, const RestoreOptions &opt) {
  if (!(opt.threshold > 0.0 && opt.threshold < 1.0))
    throw std::invalid_argument("restore: threshold must lie in (0,1)");
  const LpSolution sol = solve(problem.lp, opt.solver);
  if (sol.status != LpStatus::optimal)
    throw RestoreError(std::string("LP solve failed: ") + to_string(sol.status),
                       sol.status);

  RestoreReport r;
  r.method = method;
  r.lambda_bar = lambda_bar;
  r.blur_radius = k.radius();
  r.threshold = opt.threshold;
  r.output = problem.image(sol.x, f.spacing());
  r.binary_output = threshold(r.output, opt.threshold);
  r.objective = sol.objective;
  r.energy = method == Method::f2 ? f2_parts(r.output, f, lambda_bar)
                                  : f3_parts(r.output, f, lambda_bar, k);
  if (opt.reference)
    r.pixel_error = pixel_error(r.binary_output, *opt.reference);
  r.solver = {sol.status, sol.iterations, sol.primal_residual,
              sol.dual_residual, sol.duality_gap};
  return r;
}

} // namespace detail

/// Minimizes aniso_tv(u) + lambda_bar * sum |u - f|.
inline RestoreReport denoise_f1(const GridImage &f, double lambda_bar,
                                const RestoreOptions &opt = {}) {
  return detail::run_restore(Method::f1, build_f1_lp(f, lambda_bar), f,
                             lambda_bar, HatKernel(1), opt);
}

/// Minimizes the convex relaxation over v in [0,1]; the binary output is the
/// level set {v >= threshold}.
inline RestoreReport denoise_f2(const GridImage &f, double lambda_bar,
                                const RestoreOptions &opt = {}) {
  return detail::run_restore(Method::f2, build_f2_lp(f, lambda_bar), f,
                             lambda_bar, HatKernel(1), opt);
}

/// Minimizes aniso_tv(u) + lambda_bar * sum |K u - f| for the known kernel K.
inline RestoreReport deblur_f3(const GridImage &f, double lambda_bar,
                               const HatKernel &k, const RestoreOptions &opt = {}) {
  return detail::run_restore(Method::f3, build_f3_lp(f, lambda_bar, k), f,
                             lambda_bar, k, opt);
}

inline RestoreReport restore(Method method, const GridImage &f, double lambda_bar,
                             const HatKernel &k = HatKernel(1),
                             const RestoreOptions &opt = {}) {
  switch (method) {
  case Method::f1:
    return denoise_f1(f, lambda_bar, opt);
  case Method::f2:
    return denoise_f2(f, lambda_bar, opt);
  case Method::f3:
    return deblur_f3(f, lambda_bar, k, opt);
  }
  throw std::invalid_argument("restore: unknown method");
}

struct SweepEntry {
  double lambda_bar = 0.0;
  std::optional<RestoreReport> report;
  std::string error;
};

/// Independent restorations for each lambda_bar. A failing item records its
/// error and the sweep moves on.
inline std::vector<SweepEntry> sweep_lambda(const GridImage &f, Method method,
                                            const std::vector<double> &lambdas,
                                            const HatKernel &k = HatKernel(1),
                                            const RestoreOptions &opt = {}) {
  if (lambdas.empty())
    throw std::invalid_argument("sweep_lambda: empty lambda list");
  std::vector<SweepEntry> out;
  out.reserve(lambdas.size());
  for (double lb : lambdas) {
    SweepEntry e{lb, std::nullopt, {}};
    try {
      e.report = restore(method, f, lb, k, opt);
    } catch (const std::exception &ex) {
      e.error = ex.what();
    }
    out.push_back(std::move(e));
  }
  return out;
}

inline void write_sweep_csv(std::ostream &os, const std::vector<SweepEntry> &entries) {
  os << "lambda_bar,status,objective,tv,fidelity,pixel_error,iterations\n";
  os.precision(12);
  for (const auto &e : entries) {
    os << e.lambda_bar << ',';
    if (!e.report) {
      os << "error,,,,,\n";
      continue;
    }
    const auto &r = *e.report;
    os << to_string(r.solver.status) << ',' << r.objective << ',' << r.energy.tv
       << ',' << r.energy.fidelity << ',';
    if (r.pixel_error)
      os << *r.pixel_error;
    os << ',' << r.solver.iterations << '\n';
  }
}

inline void write_report_csv(std::ostream &os, const RestoreReport &r) {
  os.precision(12);
  os << "key,value\n"
     << "method," << to_string(r.method) << '\n'
     << "lambda_bar," << r.lambda_bar << '\n'
     << "blur_radius," << r.blur_radius << '\n'
     << "threshold," << r.threshold << '\n'
     << "objective," << r.objective << '\n'
     << "tv," << r.energy.tv << '\n'
     << "fidelity," << r.energy.fidelity << '\n'
     << "pixel_error,";
  if (r.pixel_error)
    os << *r.pixel_error;
  os << '\n'
     << "status," << to_string(r.solver.status) << '\n'
     << "iterations," << r.solver.iterations << '\n'
     << "primal_residual," << r.solver.primal_residual << '\n'
     << "dual_residual," << r.solver.dual_residual << '\n'
     << "duality_gap," << r.solver.duality_gap << '\n';
}

} // namespace bcr
