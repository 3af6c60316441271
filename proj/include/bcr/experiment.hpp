#pragma once

// Desk-scale reruns of the published denoising and deblurring figures.
// Each profile builds a bar code, degrades it, restores it with the
// published parameters and returns all panels plus a metrics table.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bcr/barcode.hpp"
#include "bcr/degrade.hpp"
#include "bcr/grid.hpp"
#include "bcr/restore.hpp"

namespace bcr {

enum class FigureProfile { fig4a, fig4b, fig5, fig6 };

inline FigureProfile parse_profile(std::string_view s) {
  if (s == "fig4a")
    return FigureProfile::fig4a;
  if (s == "fig4b")
    return FigureProfile::fig4b;
  if (s == "fig5")
    return FigureProfile::fig5;
  if (s == "fig6")
    return FigureProfile::fig6;
  throw std::invalid_argument("unknown profile '" + std::string(s) + "'");
}

struct Panel {
  std::string name;
  GridImage image;
};

struct MetricRow {
  std::string panel;
  std::string method;
  double lambda_bar = 0.0;
  int blur_radius = 1;
  double noise = 0.0;
  double snr_db = 0.0;
  double objective = 0.0;
  double pixel_error = 0.0;
  int iterations = 0;
};

struct ExperimentResult {
  std::vector<Panel> panels;
  std::vector<MetricRow> metrics;
};

/// One degradation setting and the restorations to run on it.
struct ExperimentCase {
  std::string tag;
  int blur_radius = 1;
  double noise = 0.0;
  std::vector<std::pair<Method, double>> runs;
};

struct ExperimentSetup {
  BarcodeSpec code;
  std::vector<ExperimentCase> cases;
};

inline ExperimentSetup figure_setup(FigureProfile profile, std::uint64_t seed) {
  ExperimentSetup s;
  s.code.seed = seed;
  s.code.modules_x = s.code.modules_y = 4;
  s.code.pixels_per_module = 8;
  switch (profile) {
  case FigureProfile::fig4a:
    s.cases = {{"a0.2", 1, 0.2, {{Method::f1, 75.0}, {Method::f2, 2.0}}}};
    break;
  case FigureProfile::fig4b:
    s.cases = {{"a0.35", 1, 0.35, {{Method::f1, 75.0}, {Method::f2, 2.0}}}};
    break;
  case FigureProfile::fig5:
    s.cases = {{"r8", 8, 0.0,
                {{Method::f3, 1.0}, {Method::f3, 4.0}, {Method::f3, 8.0}}}};
    break;
  case FigureProfile::fig6:
    s.code.modules_x = s.code.modules_y = 3;
    s.code.pixels_per_module = 12;
    s.cases = {{"r8_a0.02", 8, 0.02, {{Method::f3, 10.0}}},
               {"r8_a0.2", 8, 0.2, {{Method::f3, 10.0}}},
               {"r12_a0.2", 12, 0.2, {{Method::f3, 10.0}}}};
    break;
  }
  return s;
}

inline ExperimentResult run_experiment(const ExperimentSetup &setup,
                                       const SolverTolerances &solver = {}) {
  ExperimentResult out;
  const Barcode code = generate(setup.code);
  const GridImage clean = code.image.to_grid(1.0 / setup.code.pixels_per_module);
  out.panels.push_back({"original", clean});

  std::uint64_t noise_stream = 0;
  for (const auto &c : setup.cases) {
    const HatKernel k(c.blur_radius);
    const GridImage blurred = convolve_same(clean, k);
    const GridImage observed =
        add_gaussian_noise(blurred, {c.noise, setup.code.seed + 7919 * ++noise_stream});
    const double snr = observed == clean ? std::numeric_limits<double>::infinity()
                                         : snr_db(clean, observed);
    out.panels.push_back({c.tag + "_observed", observed});
    for (const auto &[method, lb] : c.runs) {
      RestoreOptions opt;
      opt.solver = solver;
      opt.reference = code.image;
      const auto r = restore(method, observed, lb, k, opt);
      std::ostringstream name;
      name << c.tag << '_' << to_string(method) << "_lambda" << lb;
      out.panels.push_back({name.str(), r.output});
      out.panels.push_back({name.str() + "_thresholded", r.binary_output.to_grid()});
      out.metrics.push_back({name.str(), to_string(method), lb, c.blur_radius, c.noise,
                             snr, r.objective, *r.pixel_error, r.solver.iterations});
    }
  }
  return out;
}

inline ExperimentResult experiment_figure(FigureProfile profile, std::uint64_t seed = 2010,
                                          const SolverTolerances &solver = {}) {
  return run_experiment(figure_setup(profile, seed), solver);
}

inline void write_metrics_csv(std::ostream &os, const std::vector<MetricRow> &rows) {
  os.precision(12);
  os << "panel,method,lambda_bar,blur_radius,noise,snr_db,objective,pixel_error,iterations\n";
  for (const auto &r : rows)
    os << r.panel << ',' << r.method << ',' << r.lambda_bar << ',' << r.blur_radius
       << ',' << r.noise << ',' << r.snr_db << ',' << r.objective << ','
       << r.pixel_error << ',' << r.iterations << '\n';
}

/// Writes every panel as <dir>/<name>.pgm and the table as metrics.csv.
inline void write_experiment(const std::filesystem::path &dir,
                             const ExperimentResult &result) {
  std::filesystem::create_directories(dir);
  for (const auto &p : result.panels)
    save_scan((dir / (p.name + ".pgm")).string(), p.image);
  std::ofstream csv(dir / "metrics.csv");
  if (!csv)
    throw std::runtime_error("cannot write " + (dir / "metrics.csv").string());
  write_metrics_csv(csv, result.metrics);
}

} // namespace bcr
