// cli.hpp — batch front-end: validate model files, dump evolved states,
// scan for glimpses (CSV output), and run the multi-environment checks.
// Exit-code contract: 0 success, 1 domain violation, 2 I/O or parse error,
// 3 wrong command for the model shape.

#pragma once

#include <sbscan/glimpse.hpp>
#include <sbscan/model_io.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace sbscan::cli {

struct RunConfig {
  std::string command;
  std::string model_path;
  std::string out_dir = ".";
  std::optional<double> t;
  std::optional<double> tol_orth;
  std::optional<double> tol_sep;
  uint64_t seed = 12345;
  std::string demo;
};

namespace cli_detail {

// 17 significant digits: every double round-trips exactly.
inline std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline bool load(const RunConfig& cfg, ModelFile& mf, std::ostream& err) {
  try {
    mf = load_model_file(cfg.model_path);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return false;
  }
  return true;
}

inline ScanSettings effective_settings(const RunConfig& cfg,
                                       const ModelFile& mf) {
  ScanSettings s = mf.scan;
  if (cfg.tol_orth) s.tol_orth = *cfg.tol_orth;
  if (cfg.tol_sep) s.tol_sep = *cfg.tol_sep;
  return s;
}

inline void print_diag(std::ostream& out, const Mat& op) {
  out << "diag(";
  for (Eigen::Index n = 0; n < op.rows(); ++n) {
    if (n) out << ", ";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", op(n, n).real());
    out << buf;
  }
  out << ")";
}

}  // namespace cli_detail

inline int cmd_validate(const RunConfig& cfg, std::ostream& out = std::cout) {
  ModelFile mf;
  if (!cli_detail::load(cfg, mf, out)) return 2;
  const auto report = validate(mf.model);
  if (report.empty()) {
    out << "model ok: dQ=" << mf.model.d_q << ", " << mf.model.env_count()
        << " environment(s), total dimension " << mf.model.total_dim() << "\n";
    return 0;
  }
  out << "model invalid:\n";
  for (const auto& v : report) out << "  - " << v << "\n";
  return 1;
}

inline int cmd_evolve(const RunConfig& cfg, std::ostream& out = std::cout) {
  ModelFile mf;
  if (!cli_detail::load(cfg, mf, out)) return 2;
  if (!is_valid(mf.model)) {
    out << "model invalid; run the validate command for details\n";
    return 1;
  }
  const double t = cfg.t.value_or(0.0);
  const auto state = joint_state_factorized(mf.model, t);

  json j;
  j["t"] = t;
  j["dims"] = state.dims;
  j["populations"] = system_populations(state);
  j["sigma"] = io_detail::matrix_to_json(state.sigma);

  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  const auto path = std::filesystem::path(cfg.out_dir) / "state.json";
  std::ofstream file(path);
  if (!file) {
    out << "error: cannot write " << path.string() << "\n";
    return 2;
  }
  file << j.dump(2) << "\n";
  out << "state at t=" << cli_detail::num(t) << " written to " << path.string()
      << "\n";
  const auto pops = system_populations(state);
  out << "populations:";
  for (double p : pops) out << " " << cli_detail::num(p);
  out << "\n";
  return 0;
}

inline int cmd_scan(const RunConfig& cfg, std::ostream& out = std::cout) {
  ModelFile mf;
  if (!cli_detail::load(cfg, mf, out)) return 2;
  const auto violations = validate(mf.model);
  if (!violations.empty()) {
    out << "model invalid:\n";
    for (const auto& v : violations) out << "  - " << v << "\n";
    return 1;
  }
  if (mf.model.env_count() != 1) {
    out << "scan handles single-environment models; use the multienv "
           "command\n";
    return 3;
  }

  const ScanSettings settings = cli_detail::effective_settings(cfg, mf);
  DiscordOptions discord;
  discord.seed = cfg.seed;
  const auto result = scan_glimpses(mf.model, settings, discord);

  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  const auto scan_path = std::filesystem::path(cfg.out_dir) / "scan.csv";
  {
    std::ofstream file(scan_path);
    if (!file) {
      out << "error: cannot write " << scan_path.string() << "\n";
      return 2;
    }
    file << "t,orth_residual,sep_deviation,negativity,discord_env,"
            "sbs_distance,is_glimpse\n";
    for (const auto& row : result.grid)
      file << cli_detail::num(row.t) << "," << cli_detail::num(row.orth_residual)
           << "," << cli_detail::num(row.sep_deviation) << ","
           << cli_detail::num(row.negativity) << ","
           << cli_detail::num(row.discord_env) << ","
           << cli_detail::num(row.sbs_distance) << ","
           << (row.is_glimpse ? 1 : 0) << "\n";
  }
  const auto glimpse_path = std::filesystem::path(cfg.out_dir) / "glimpses.csv";
  {
    std::ofstream file(glimpse_path);
    if (!file) {
      out << "error: cannot write " << glimpse_path.string() << "\n";
      return 2;
    }
    file << "t_glimpse,p_I,p_II,mub_ok,sbs_distance\n";
    for (const auto& g : result.glimpses)
      file << cli_detail::num(g.t) << ","
           << cli_detail::num(g.report.group_probs[0]) << ","
           << cli_detail::num(g.report.group_probs.size() > 1
                                  ? g.report.group_probs[1]
                                  : 0.0)
           << "," << (g.report.mub_ok ? 1 : 0) << ","
           << cli_detail::num(g.report.residuals.sbs_trace_distance) << "\n";
  }

  double min_residual = std::numeric_limits<double>::infinity();
  for (const auto& row : result.grid)
    if (std::isfinite(row.orth_residual))
      min_residual = std::min(min_residual, row.orth_residual);

  out << "scan: " << result.grid.size() << " grid points over [0, "
      << cli_detail::num(settings.t_max) << "], min residual "
      << cli_detail::num(min_residual) << "\n";
  out << "glimpses found: " << result.glimpses.size() << "\n";
  for (const auto& g : result.glimpses)
    out << "  t=" << cli_detail::num(g.t) << "  p=("
        << cli_detail::num(g.report.group_probs[0]) << ", "
        << cli_detail::num(g.report.group_probs.size() > 1
                               ? g.report.group_probs[1]
                               : 0.0)
        << ")  mub=" << (g.report.mub_ok ? "yes" : "no")
        << "  sbs_distance=" << cli_detail::num(
               g.report.residuals.sbs_trace_distance)
        << "\n";
  out << "wrote " << scan_path.string() << " and " << glimpse_path.string()
      << "\n";
  return 0;
}

namespace cli_detail {

inline void print_multi_env(const MultiEnvReport& rep, std::ostream& out) {
  out << "system-side grouping: " << (rep.system_side_ok ? "pass" : "fail")
      << ", " << rep.groups.size() << " group(s)\n";
  for (size_t g = 0; g < rep.groups.size(); ++g) {
    out << "group " << g << ": p=" << num(rep.group_probs[g])
        << ", conditionals per environment:\n";
    for (size_t q = 0; q < rep.conditional_ops[g].size(); ++q) {
      out << "    env " << q << ": ";
      print_diag(out, rep.conditional_ops[g][q]);
      out << "\n";
    }
  }
  out << "per-environment orthogonality deviation:";
  for (double d : rep.env_orth_deviation) out << " " << num(d);
  out << "\n";
  for (const auto& d : rep.diagnostics) out << "note: " << d << "\n";
  out << "verdict: " << (rep.full_sbs ? "FULL-SBS" : "NO-FULL-SBS") << "\n";
}

}  // namespace cli_detail

inline int cmd_multienv(const RunConfig& cfg, std::ostream& out = std::cout) {
  if (cfg.demo == "symmetric") {
    const auto m = symmetric_demo_model();
    out << "symmetric allotment demo (two qubit environments, t = pi)\n";
    cli_detail::print_multi_env(multi_env_check(m, symmetric_demo_time()), out);
    return 0;
  }
  if (cfg.demo == "asymmetric") {
    out << "asymmetric allotment demo (imposed grouping |00> vs rest)\n";
    const auto rep = asymmetric_demo_report();
    out << "three-term structure of the minus group:\n";
    out << "  p=" << cli_detail::num(rep.branches[1].probability)
        << "  env1 level 0, env2 level 1\n";
    out << "  p="
        << cli_detail::num(rep.branches[2].probability +
                           rep.branches[3].probability)
        << "  env1 level 1, env2 maximally mixed\n";
    cli_detail::print_multi_env(rep, out);
    return 0;
  }
  if (!cfg.demo.empty()) {
    out << "error: unknown demo '" << cfg.demo
        << "' (expected symmetric or asymmetric)\n";
    return 2;
  }

  ModelFile mf;
  if (!cli_detail::load(cfg, mf, out)) return 2;
  const auto violations = validate(mf.model);
  if (!violations.empty()) {
    out << "model invalid:\n";
    for (const auto& v : violations) out << "  - " << v << "\n";
    return 1;
  }
  if (mf.model.env_count() < 2) {
    out << "multienv handles models with at least two environments; use the "
           "scan command\n";
    return 3;
  }
  if (!cfg.t) {
    out << "error: multienv requires --t <time>\n";
    return 2;
  }
  const ScanSettings settings = cli_detail::effective_settings(cfg, mf);
  const auto rep =
      multi_env_check(mf.model, *cfg.t, settings.tol_orth, settings.tol_sep);
  cli_detail::print_multi_env(rep, out);
  return 0;
}

inline int run(const RunConfig& cfg, std::ostream& out = std::cout) {
  if (cfg.command == "validate") return cmd_validate(cfg, out);
  if (cfg.command == "evolve") return cmd_evolve(cfg, out);
  if (cfg.command == "scan") return cmd_scan(cfg, out);
  if (cfg.command == "multienv") return cmd_multienv(cfg, out);
  out << "error: unknown command '" << cfg.command << "'\n";
  return 2;
}

}  // namespace sbscan::cli
