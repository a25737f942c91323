// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include "nahmpole/error.hpp"
#include "nahmpole/io/commands_analysis.hpp"
#include "nahmpole/io/commands_basic.hpp"
#include "nahmpole/io/commands_solve.hpp"
#include "nahmpole/io/config.hpp"
#include "nahmpole/io/report.hpp"
#include "nahmpole/io/run_context.hpp"

namespace nahmpole {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitConvergence = 2, kExitInvariant = 3 };

struct RunOutcome {
  int exit_code = kExitOk;
  Report report;
  std::string report_path;
  std::vector<std::string> artifacts;
};

/// Re-parses the config with command-line overrides appended, so they are validated and echoed like file keys.
inline RunConfig apply_overrides(const RunConfig& base, const std::vector<std::pair<std::string, std::string>>& overrides) {
  if (overrides.empty()) return base;
  std::string text;
  for (const auto& [k, v] : base.entries) {
    bool replaced = false;
    for (const auto& o : overrides) replaced = replaced || o.first == k;
    if (!replaced) text += k + " = " + v + "\n";
  }
  for (const auto& [k, v] : overrides) text += k + " = " + v + "\n";
  return parse_config_text(text, base.source + " (with overrides)", base.base_dir, base.command);
}

/// Runs one subcommand; never throws. Module errors map to exit codes 1, 2, 3.
inline RunOutcome run(const RunConfig& cfg) {
  RunOutcome out;
  Report& r = out.report;
  r.set("command", to_string(cfg.command));
  for (const auto& [k, v] : resolved_config(cfg)) r.append("config." + k, v);

  std::filesystem::path dir(cfg.out);
  const auto t0 = std::chrono::steady_clock::now();
  RunContext ctx{cfg, r, dir, {}};
  try {
    std::filesystem::create_directories(dir);
    switch (cfg.command) {
      case Command::Model: run_model(ctx); break;
      case Command::Ode: run_ode(ctx); break;
      case Command::Spectrum: run_spectrum(ctx); break;
      case Command::SolveSurface: run_solve_surface(ctx); break;
      case Command::SolveCylinder: run_solve_cylinder(ctx); break;
      case Command::SolvePlane: run_solve_plane(ctx); break;
      case Command::Verify: run_verify(ctx); break;
      case Command::Distance: run_distance(ctx); break;
      case Command::Study: run_study(ctx); break;
    }
    if (!r.ok()) out.exit_code = kExitInvariant;
  } catch (const InputError& e) {
    r.set("error", e.what());
    r.fail();
    out.exit_code = kExitConfig;
  } catch (const ConvergenceError& e) {
    r.set("error", e.what());
    r.fail();
    out.exit_code = kExitConvergence;
  } catch (const InvariantError& e) {
    r.set("error", e.what());
    r.fail();
    out.exit_code = kExitInvariant;
  } catch (const std::filesystem::filesystem_error& e) {
    r.set("error", e.what());
    r.fail();
    out.exit_code = kExitConfig;
  } catch (const std::exception& e) {
    r.set("error", e.what());
    r.fail();
    out.exit_code = kExitInvariant;
  }
  r.set("seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  r.set("exit_code", out.exit_code);
  out.artifacts = ctx.artifacts;
  try {
    out.report_path = ctx.path(to_string(cfg.command) + ".report");
    r.write(out.report_path);
  } catch (const std::exception&) {
    out.report_path.clear();
    if (out.exit_code == kExitOk) out.exit_code = kExitConfig;
  }
  return out;
}

}  // namespace nahmpole
