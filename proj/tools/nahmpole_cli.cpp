// SPDX-License-Identifier: Apache-2.0
// nahmpole <subcommand> --config <path> [--out <dir>] [--resolution NX,NY,NZ] [--tol T]

#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "nahmpole/cli_io.hpp"

int main(int argc, char** argv) {
  using namespace nahmpole;
  CLI::App app{"Numerical lab for the scalar Bogomolny reduction"};
  app.require_subcommand(1);

  std::string config_path, out_dir, resolution, tol;
  bool quiet = false;
  const std::vector<Command> commands{Command::Model,        Command::Ode,           Command::Spectrum,
                                      Command::SolveSurface, Command::SolveCylinder, Command::SolvePlane,
                                      Command::Verify,       Command::Distance,      Command::Study};
  for (Command c : commands) {
    CLI::App* sub = app.add_subcommand(to_string(c), "run the " + to_string(c) + " command");
    sub->add_option("--config", config_path, "config file (key = value lines)")->required();
    sub->add_option("--out", out_dir, "output directory for the report and field files");
    sub->add_option("--resolution", resolution, "grid resolution override, e.g. 32,32,128");
    sub->add_option("--tol", tol, "solver tolerance override");
    sub->add_flag("--quiet", quiet, "do not print the report");
  }
  CLI11_PARSE(app, argc, argv);

  const std::string name = app.get_subcommands().front()->get_name();
  const Command command = *command_from_string(name);
  RunConfig cfg;
  try {
    cfg = parse_config(config_path, command);
    std::vector<std::pair<std::string, std::string>> overrides;
    if (!out_dir.empty()) overrides.emplace_back("out", out_dir);
    if (!resolution.empty()) overrides.emplace_back("resolution", resolution);
    if (!tol.empty()) overrides.emplace_back("tol", tol);
    cfg = apply_overrides(cfg, overrides);
  } catch (const InputError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  const RunOutcome outcome = run(cfg);
  if (!quiet) std::cout << outcome.report.str();
  if (!outcome.report_path.empty()) std::cerr << "report: " << outcome.report_path << "\n";
  if (outcome.report.has("error")) std::cerr << "error: " << outcome.report.get("error") << "\n";
  return outcome.exit_code;
}
