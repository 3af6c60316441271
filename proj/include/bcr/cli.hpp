#pragma once

// Command-line front end. Exit codes: 0 success, 1 verification or I/O
// failure, 2 usage error.
//
// Image files are PGM with the usual brightness convention (0 = black);
// they are inverted on load so that bar code ink is 1 internally.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bcr/barcode.hpp"
#include "bcr/certificate.hpp"
#include "bcr/checks.hpp"
#include "bcr/degrade.hpp"
#include "bcr/experiment.hpp"
#include "bcr/functional.hpp"
#include "bcr/grid.hpp"
#include "bcr/lp.hpp"
#include "bcr/restore.hpp"

namespace bcr {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Sidecar metadata path: foo.pgm -> foo.meta.
inline std::string meta_path(const std::string &image_path) {
  return std::filesystem::path(image_path).replace_extension(".meta").string();
}

namespace detail {

inline std::pair<std::size_t, std::size_t> parse_modules(const std::string &s) {
  const auto pos = s.find('x');
  if (pos == std::string::npos)
    throw CLI::ValidationError("--modules", "expected WxH, e.g. 4x4");
  try {
    const auto w = std::stoul(s.substr(0, pos));
    const auto h = std::stoul(s.substr(pos + 1));
    if (w < 1 || h < 1)
      throw CLI::ValidationError("--modules", "module counts must be >= 1");
    return {w, h};
  } catch (const std::logic_error &) {
    throw CLI::ValidationError("--modules", "expected WxH, e.g. 4x4");
  }
}

inline std::vector<double> parse_lambdas(const std::string &s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size())
        throw std::invalid_argument(item);
    } catch (const std::logic_error &) {
      throw CLI::ValidationError("--lambdas", "bad value '" + item + "'");
    }
  }
  if (out.empty())
    throw CLI::ValidationError("--lambdas", "empty list");
  return out;
}

inline void append_meta(const std::string &path, const std::string &line) {
  std::ofstream out(path, std::ios::app);
  if (!out)
    throw std::runtime_error("cannot write " + path);
  out << line << '\n';
}

} // namespace detail

/// Parses and executes one command line (args excludes the program name).
inline int run(const std::vector<std::string> &args, std::ostream &out = std::cout,
               std::ostream &err = std::cerr) {
  CLI::App app{"Bar code restoration by anisotropic total variation", "bcr"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Print help for every subcommand");

  int exit_code = kExitOk;
  SolverTolerances solver;
  auto add_solver_flags = [&](CLI::App *cmd) {
    cmd->add_option("--tol", solver.eps, "Interior-point tolerance")->check(CLI::PositiveNumber);
    cmd->add_option("--max-iter", solver.max_iterations, "Interior-point iteration cap")
        ->check(CLI::PositiveNumber);
  };

  // generate
  std::string modules = "4x4", gen_out;
  BarcodeSpec gen;
  auto *cmd_gen = app.add_subcommand("generate", "Write a random matrix bar code");
  cmd_gen->add_option("--modules", modules, "Module grid WxH");
  cmd_gen->add_option("--ppm", gen.pixels_per_module, "Pixels per module")->check(CLI::PositiveNumber);
  cmd_gen->add_option("--margin", gen.margin_modules, "Quiet zone in modules")->check(CLI::PositiveNumber);
  cmd_gen->add_option("--density", gen.fill_density, "Probability a module is black")
      ->check(CLI::Range(0.0, 1.0));
  cmd_gen->add_option("--seed", gen.seed, "Random seed");
  cmd_gen->add_option("output", gen_out, "Output PGM")->required();
  cmd_gen->callback([&] {
    std::tie(gen.modules_x, gen.modules_y) = detail::parse_modules(modules);
    const Barcode code = generate(gen);
    save_scan(gen_out, code.image.to_grid());
    std::ofstream meta(meta_path(gen_out));
    meta << "omega_pixels=" << code.omega_pixels << '\n'
         << "pixels_per_module=" << gen.pixels_per_module << '\n'
         << "seed=" << gen.seed << '\n';
    if (!meta)
      throw std::runtime_error("cannot write " + meta_path(gen_out));
    out << "generated " << gen_out << ' ' << code.image.width() << 'x'
        << code.image.height() << " omega_pixels=" << code.omega_pixels << '\n';
  });

  // degrade
  int blur_radius = 1;
  double noise = 0.0;
  std::uint64_t noise_seed = 0;
  unsigned maxval = 65535;
  std::string in_path, out_path;
  auto *cmd_deg = app.add_subcommand("degrade", "Blur and add Gaussian noise");
  cmd_deg->add_option("--blur-radius", blur_radius, "Hat kernel radius")->check(CLI::PositiveNumber);
  cmd_deg->add_option("--noise", noise, "Noise standard deviation")->check(CLI::NonNegativeNumber);
  cmd_deg->add_option("--seed", noise_seed, "Noise seed");
  cmd_deg->add_option("--maxval", maxval, "Output maxval")->check(CLI::IsMember({255u, 65535u}));
  cmd_deg->add_option("input", in_path, "Clean PGM")->required();
  cmd_deg->add_option("output", out_path, "Degraded PGM")->required();
  cmd_deg->callback([&] {
    const GridImage clean = load_scan(in_path);
    const GridImage observed =
        add_gaussian_noise(convolve_same(clean, HatKernel(blur_radius)), {noise, noise_seed});
    save_scan(out_path, observed, maxval);
    const auto src_meta = meta_path(in_path), dst_meta = meta_path(out_path);
    if (std::filesystem::exists(src_meta) && src_meta != dst_meta)
      std::filesystem::copy_file(src_meta, dst_meta,
                                 std::filesystem::copy_options::overwrite_existing);
    std::ostringstream line;
    line.precision(12);
    line << "snr_db=" << (observed == clean ? std::numeric_limits<double>::infinity()
                                            : snr_db(clean, observed));
    detail::append_meta(dst_meta, line.str());
    out << "degraded " << out_path << ' ' << line.str() << '\n';
  });

  // restore
  std::string method_name = "f2", report_path, reference_path, raw_out;
  double lambda_bar = 2.0, thresh = 0.5;
  auto *cmd_res = app.add_subcommand("restore", "Restore a scan by LP minimization");
  cmd_res->add_option("--method", method_name, "f1, f2 or f3")
      ->check(CLI::IsMember({"f1", "f2", "f3"}));
  cmd_res->add_option("--lambda-bar", lambda_bar, "Dimensionless fidelity weight")
      ->check(CLI::NonNegativeNumber);
  cmd_res->add_option("--blur-radius", blur_radius, "Hat kernel radius (f3)")->check(CLI::PositiveNumber);
  cmd_res->add_option("--threshold", thresh, "Level for the binary output")
      ->check(CLI::Range(0.0, 1.0));
  cmd_res->add_option("--reference", reference_path, "Clean PGM for pixel_error");
  cmd_res->add_option("--report", report_path, "key,value CSV report");
  cmd_res->add_option("--raw-out", raw_out, "Also write the unthresholded minimizer");
  cmd_res->add_option("input", in_path, "Observed PGM")->required();
  cmd_res->add_option("output", out_path, "Thresholded PGM")->required();
  add_solver_flags(cmd_res);
  cmd_res->callback([&] {
    const GridImage f = load_scan(in_path);
    RestoreOptions opt;
    opt.threshold = thresh;
    opt.solver = solver;
    if (!reference_path.empty())
      opt.reference = threshold(load_scan(reference_path), 0.5);
    const auto r = restore(parse_method(method_name), f, lambda_bar, HatKernel(blur_radius), opt);
    save_scan(out_path, r.binary_output.to_grid());
    if (!raw_out.empty())
      save_scan(raw_out, r.output, 65535);
    if (!report_path.empty()) {
      std::ofstream csv(report_path);
      write_report_csv(csv, r);
      if (!csv)
        throw std::runtime_error("cannot write " + report_path);
    }
    out << "restored " << out_path << " method=" << method_name << " objective="
        << r.objective << " iterations=" << r.solver.iterations;
    if (r.pixel_error)
      out << " pixel_error=" << *r.pixel_error;
    out << '\n';
  });

  // evaluate
  std::string functional_name = "f1", u_path, f_path;
  auto *cmd_eval = app.add_subcommand("evaluate", "Evaluate an energy at an image");
  cmd_eval->add_option("--functional", functional_name, "f1, f2 or f3")
      ->check(CLI::IsMember({"f1", "f2", "f3"}));
  cmd_eval->add_option("--lambda-bar", lambda_bar, "Dimensionless fidelity weight")
      ->check(CLI::NonNegativeNumber);
  cmd_eval->add_option("--blur-radius", blur_radius, "Hat kernel radius (f3)")->check(CLI::PositiveNumber);
  cmd_eval->add_option("candidate", u_path, "Image to evaluate")->required();
  cmd_eval->add_option("observed", f_path, "Observed data f")->required();
  cmd_eval->callback([&] {
    const GridImage u = load_scan(u_path), f = load_scan(f_path);
    EnergyParts e;
    switch (parse_method(functional_name)) {
    case Method::f1:
      e = f1_parts(u, f, lambda_bar);
      break;
    case Method::f2:
      e = f2_parts(u, f, lambda_bar);
      break;
    case Method::f3:
      e = f3_parts(u, f, lambda_bar, HatKernel(blur_radius));
      break;
    }
    out.precision(12);
    out << "value=" << e.total() << '\n' << "tv,fidelity\n" << e.tv << ',' << e.fidelity << '\n';
  });

  // certify
  std::string code_path;
  auto *cmd_cert = app.add_subcommand("certify", "Build and verify a dual certificate");
  cmd_cert->add_option("--lambda-bar", lambda_bar, "Fidelity weight to certify")
      ->check(CLI::NonNegativeNumber);
  cmd_cert->add_option("barcode", code_path, "Clean bar code PGM")->required();
  cmd_cert->callback([&] {
    const BinaryImage img = threshold(load_scan(code_path), 0.5);
    const auto code = Barcode::from_image(img);
    const auto report = verify_certificate(img, build_certificate(code), lambda_bar);
    out.precision(12);
    report.write_csv(out);
    exit_code = report.passed() ? kExitOk : kExitFailure;
  });

  // sweep
  std::string lambdas_arg, out_dir;
  auto *cmd_sweep = app.add_subcommand("sweep", "Restore for a list of lambda_bar values");
  cmd_sweep->add_option("--method", method_name, "f1, f2 or f3")
      ->check(CLI::IsMember({"f1", "f2", "f3"}));
  cmd_sweep->add_option("--lambdas", lambdas_arg, "Comma-separated lambda_bar values")->required();
  cmd_sweep->add_option("--blur-radius", blur_radius, "Hat kernel radius (f3)")->check(CLI::PositiveNumber);
  cmd_sweep->add_option("--threshold", thresh, "Level for the binary output")
      ->check(CLI::Range(0.0, 1.0));
  cmd_sweep->add_option("--reference", reference_path, "Clean PGM for pixel_error");
  cmd_sweep->add_option("--report", report_path, "CSV summary (default: stdout)");
  cmd_sweep->add_option("--out-dir", out_dir, "Write thresholded outputs here");
  cmd_sweep->add_option("input", in_path, "Observed PGM")->required();
  add_solver_flags(cmd_sweep);
  cmd_sweep->callback([&] {
    const GridImage f = load_scan(in_path);
    RestoreOptions opt;
    opt.threshold = thresh;
    opt.solver = solver;
    if (!reference_path.empty())
      opt.reference = threshold(load_scan(reference_path), 0.5);
    const auto entries = sweep_lambda(f, parse_method(method_name),
                                      detail::parse_lambdas(lambdas_arg),
                                      HatKernel(blur_radius), opt);
    if (!out_dir.empty()) {
      std::filesystem::create_directories(out_dir);
      for (const auto &e : entries)
        if (e.report) {
          std::ostringstream name;
          name << method_name << "_lambda" << e.lambda_bar << ".pgm";
          save_scan((std::filesystem::path(out_dir) / name.str()).string(),
                    e.report->binary_output.to_grid());
        }
    }
    if (report_path.empty()) {
      write_sweep_csv(out, entries);
    } else {
      std::ofstream csv(report_path);
      write_sweep_csv(csv, entries);
      if (!csv)
        throw std::runtime_error("cannot write " + report_path);
      out << "sweep " << entries.size() << " entries -> " << report_path << '\n';
    }
    for (const auto &e : entries)
      if (!e.report) {
        err << "lambda_bar=" << e.lambda_bar << ": " << e.error << '\n';
        exit_code = kExitFailure;
      }
  });

  // oracle-check
  OracleCheckConfig oracle;
  auto *cmd_oracle = app.add_subcommand(
      "oracle-check", "Compare thresholded relaxation against exhaustive search");
  cmd_oracle->add_option("--max-pixels", oracle.max_pixels, "Pixels per test image")
      ->check(CLI::Range(4, static_cast<int>(kBruteForceMaxPixels)));
  cmd_oracle->add_option("--trials", oracle.trials, "Number of random inputs")->check(CLI::PositiveNumber);
  cmd_oracle->add_option("--seed", oracle.seed, "Random seed");
  cmd_oracle->add_option("--noise", oracle.noise, "Noise standard deviation")
      ->check(CLI::NonNegativeNumber);
  cmd_oracle->callback([&] {
    const auto trials = oracle_check(oracle);
    out.precision(12);
    out << "trial,lambda_bar,relaxed_energy,exact_energy,passed\n";
    int failed = 0;
    for (std::size_t i = 0; i < trials.size(); ++i) {
      const auto &t = trials[i];
      out << i << ',' << t.lambda_bar << ',' << t.relaxed_energy << ',' << t.exact_energy
          << ',' << t.passed << '\n';
      failed += !t.passed;
    }
    err << "oracle-check: " << trials.size() - failed << '/' << trials.size() << " passed\n";
    exit_code = failed ? kExitFailure : kExitOk;
  });

  // selftest
  std::uint64_t selftest_seed = 12345;
  auto *cmd_self = app.add_subcommand("selftest", "Run the built-in invariant checks");
  cmd_self->add_option("--seed", selftest_seed, "Random seed");
  cmd_self->callback([&] {
    int failed = 0;
    const auto results = selftest(selftest_seed);
    for (const auto &r : results) {
      out << (r.passed ? "PASS " : "FAIL ") << r.name;
      if (!r.detail.empty())
        out << " (" << r.detail << ')';
      out << '\n';
      failed += !r.passed;
    }
    out << "selftest: " << results.size() - failed << '/' << results.size() << " passed\n";
    exit_code = failed ? kExitFailure : kExitOk;
  });

  // experiment
  std::string profile_name;
  std::uint64_t experiment_seed = 2010;
  auto *cmd_exp = app.add_subcommand("experiment", "Rerun a figure profile");
  cmd_exp->add_option("--profile", profile_name, "fig4a, fig4b, fig5 or fig6")
      ->required()
      ->check(CLI::IsMember({"fig4a", "fig4b", "fig5", "fig6"}));
  cmd_exp->add_option("--seed", experiment_seed, "Bar code and noise seed");
  cmd_exp->add_option("--out-dir", out_dir, "Report directory")->required();
  add_solver_flags(cmd_exp);
  cmd_exp->callback([&] {
    const auto result = experiment_figure(parse_profile(profile_name), experiment_seed, solver);
    write_experiment(out_dir, result);
    out << "experiment " << profile_name << ": " << result.panels.size()
        << " panels -> " << out_dir << '\n';
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << '\n' << app.help();
    return kExitUsage;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return exit_code;
}

} // namespace bcr
