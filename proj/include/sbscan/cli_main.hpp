// cli_main.hpp — argv parsing for the sbscan tool, split from cli.hpp so
// the argument plumbing is unit-testable.

#pragma once

#include <sbscan/cli.hpp>

#include <CLI11.hpp>

namespace sbscan::cli {

/// Parses argv into a RunConfig. Returns the process exit code through
/// `exit_code` when parsing ends the run (help output or a usage error);
/// otherwise leaves it untouched and returns true.
inline bool parse_args(int argc, const char* const* argv, RunConfig& cfg,
                       int& exit_code) {
  CLI::App app{
      "sbscan: simulate pure-dephasing system-environment evolutions and "
      "locate the instants at which they momentarily take spectrum "
      "broadcast structure"};
  app.require_subcommand(1);

  double t_value = 0.0, tol_orth = 0.0, tol_sep = 0.0;

  const auto add_common = [&](CLI::App* sub, bool model_required) {
    auto* model =
        sub->add_option("--model", cfg.model_path, "model file (JSON)");
    if (model_required) model->required();
    sub->add_option("--out", cfg.out_dir, "output directory");
    sub->add_option("--tol-orth", tol_orth, "orthogonality tolerance override");
    sub->add_option("--tol-sep", tol_sep, "separability tolerance override");
    sub->add_option("--seed", cfg.seed, "seed for the discord minimizer grid");
  };

  auto* validate = app.add_subcommand("validate", "check a model file");
  add_common(validate, true);

  auto* evolve = app.add_subcommand("evolve", "dump the joint state at time t");
  add_common(evolve, true);
  evolve->add_option("--t", t_value, "evolution time");

  auto* scan = app.add_subcommand("scan", "scan a window for glimpses (CSV)");
  add_common(scan, true);

  auto* multienv =
      app.add_subcommand("multienv", "per-environment orthogonality check");
  add_common(multienv, false);
  multienv->add_option("--t", t_value, "evaluation time");
  multienv->add_option("--demo", cfg.demo,
                       "built-in demo: symmetric or asymmetric");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    exit_code = app.exit(e);
    return false;
  }

  CLI::App* sub = app.get_subcommands().front();
  cfg.command = sub->get_name();
  const auto given = [&sub](const std::string& name) {
    const CLI::Option* opt = sub->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--t")) cfg.t = t_value;
  if (given("--tol-orth")) cfg.tol_orth = tol_orth;
  if (given("--tol-sep")) cfg.tol_sep = tol_sep;
  return true;
}

inline int run(int argc, const char* const* argv,
               std::ostream& out = std::cout) {
  RunConfig cfg;
  int exit_code = 0;
  if (!parse_args(argc, argv, cfg, exit_code)) return exit_code;
  return run(cfg, out);
}

}  // namespace sbscan::cli
