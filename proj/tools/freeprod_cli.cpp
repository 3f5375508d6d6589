// freeprod: batch runner for free-product experiments.
//
//   freeprod run <config.json> [--seed N] [--tol-scale X] [--out-dir DIR]
//   freeprod emit <report.json> <series> [--out-dir DIR]
//
// Exit status: 0 pass, 1 invariant failure, 2 usage or parse error, 3 internal error.

#include <iostream>

#include <CLI11.hpp>

#include "freeprod/common.hpp"
#include "freeprod/experiment.hpp"

namespace {

enum Exit { kPass = 0, kFail = 1, kUsage = 2, kInternal = 3 };

int exit_for(const freeprod::Error& e) {
  switch (e.code()) {
    case freeprod::ErrorCode::Parse:
    case freeprod::ErrorCode::InvalidArgument:
      return kUsage;
    default:
      return kFail;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Free-product experiments: run configs and export plot data"};
  app.require_subcommand(1);

  freeprod::RunOptions options;
  std::string config_path;
  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "Run an experiment config and write its report");
  run->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  auto* seed_opt = run->add_option("--seed", seed, "Override the PRNG seed");
  run->add_option("--tol-scale", options.tol_scale, "Multiply every tolerance by this factor")
      ->check(CLI::PositiveNumber);
  std::string run_out;
  auto* run_out_opt = run->add_option("--out-dir", run_out, "Output directory (default $FREEPROD_OUT_DIR or .)");

  std::string report_path, series;
  std::string emit_out;
  auto* emit = app.add_subcommand("emit", "Write one series of a report as CSV");
  emit->add_option("report", report_path, "Report written by 'run'")->required()->check(CLI::ExistingFile);
  emit->add_option("series", series, "Series name (trace, gamma_decay, amplitude)")->required();
  auto* emit_out_opt = emit->add_option("--out-dir", emit_out, "Output directory (default $FREEPROD_OUT_DIR or .)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  try {
    if (*run) {
      if (*seed_opt) options.seed = seed;
      if (*run_out_opt) options.out_dir = run_out;
      const auto config = freeprod::parse_config_file(config_path, options);
      const auto report = freeprod::run_experiment(config);
      const std::string path = freeprod::write_report(config, report);
      for (const auto& c : report.checks)
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  value=" << c.value
                  << "  tol=" << c.tolerance << '\n';
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << "report: " << path << '\n';
      return report.passed() ? kPass : kFail;
    }
    const std::string dir =
        freeprod::default_out_dir(*emit_out_opt ? std::optional<std::string>(emit_out) : std::nullopt);
    std::cout << freeprod::emit_series(report_path, series, dir) << '\n';
    return kPass;
  } catch (const freeprod::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_for(e);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}
