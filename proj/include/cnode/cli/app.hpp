#pragma once

#include <cstdint>
#include <exception>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <cnode/cli/commands.hpp>
#include <cnode/cli/config.hpp>
#include <cnode/errors.hpp>

namespace cnode::cli {

/// Maps a library exception to the tool's exit code.
inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ArgumentError*>(&e)) return kUsage;
  if (dynamic_cast<const NumericError*>(&e) || dynamic_cast<const ConvergenceError*>(&e)) return kNumericFailure;
  return kDataError;  // I/O, parse, validation and shape errors
}

/**
 * Parses argv and runs one subcommand. Output goes to `out`, diagnostics to
 * `err`; nothing touches the process streams, so tests can call this directly.
 */
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Identify bilinear thermal dynamics with constrained neural state-space models", "cnode"};
  app.fallthrough();
  app.require_subcommand(1);

  std::string config_path, scale, out_dir, run_id;
  std::uint64_t seed = 0;
  std::size_t jobs = 0, restarts = 0, epochs = 0;
  bool paper_scale = false;
  std::vector<std::string> variants;
  std::vector<std::size_t> horizons;
  std::vector<double> lrs;

  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "master seed");
  auto* jobs_opt = app.add_option("--jobs", jobs, "parallel sweep workers (default: all cores)");
  auto* scale_opt = app.add_option("--scale", scale, "desk | paper")->check(CLI::IsMember({"desk", "paper"}));
  app.add_flag("--paper-scale", paper_scale, "same as --scale paper");
  auto* out_opt = app.add_option("--out", out_dir, "output root directory");
  auto* id_opt = app.add_option("--run-id", run_id, "run directory name under the output root");
  auto* var_opt = app.add_option("--variants", variants, "model labels: black gray white cblack cgray cwhite srnn");
  auto* n_opt = app.add_option("--N", horizons, "prediction horizons");
  auto* lr_opt = app.add_option("--lr", lrs, "learning rates");
  auto* restarts_opt = app.add_option("--restarts", restarts, "restarts per cell");
  auto* epochs_opt = app.add_option("--epochs", epochs, "epochs per restart");

  auto* sim = app.add_subcommand("simulate", "generate the synthetic dataset and its manifest");
  auto* train = app.add_subcommand("train", "run the training sweep, writing checkpoints and results.csv");
  auto* report = app.add_subcommand("report", "evaluate checkpoints and export tables, traces and figures");
  auto* check = app.add_subcommand("check", "gradient and spectral self-tests");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    RunConfig c = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (*seed_opt) c.seed = seed;
    if (*jobs_opt) c.jobs = jobs;
    if (*scale_opt) c.scale = parse_scale(scale);
    if (paper_scale) c.scale = Scale::paper;
    if (*out_opt) c.out = out_dir;
    if (*id_opt) c.run_id = run_id;
    if (*var_opt) c.models = variants;
    if (*n_opt) c.horizons = horizons;
    if (*lr_opt) c.learning_rates = lrs;
    if (*restarts_opt) c.restarts = restarts;
    if (*epochs_opt) c.epochs = epochs;

    if (*sim) return cmd_simulate(c, out);
    if (*train) return cmd_train(c, out);
    if (*report) return cmd_report(c, out);
    if (*check) return cmd_check(c, out);
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace cnode::cli
