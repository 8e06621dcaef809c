#include <CLI11.hpp>

#include <iostream>
#include <sstream>

#include "cw_app/commands.hpp"

namespace cw::app {

namespace {

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos)
      throw Error(ErrorKind::validation, "--epsilons: cannot parse '" + item + "'");
    if (!(x > 0.0)) throw Error(ErrorKind::validation, "--epsilons: epsilon must be > 0");
    out.push_back(x);
  }
  if (out.empty()) throw Error(ErrorKind::validation, "--epsilons: empty list");
  return out;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Partially congested traveling waves: profiles, simulations, audits, sweeps"};
  app.require_subcommand(1);
  std::string config = "default";
  std::string out;
  std::string epsilons;
  bool quiet = false;
  app.add_option("--config", config, "YAML config file, or 'default'");
  app.add_option("--out", out, "output directory (overrides outputs.directory)");
  app.add_option("--epsilons", epsilons, "comma-separated epsilon list for sweep");
  app.add_flag("--quiet", quiet, "suppress progress messages");
  app.fallthrough();
  auto* profile = app.add_subcommand("profile", "solve the traveling wave and check its envelopes");
  auto* simulate = app.add_subcommand("simulate", "run perturbed dynamics and write the energy ledger");
  auto* audit = app.add_subcommand("audit", "fit the constants of the supporting inequalities");
  auto* sweep = app.add_subcommand("sweep", "repeat over epsilon or amplitude values");
  for (auto* sub : {profile, simulate, audit, sweep}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    nlohmann::json err = {{"error", "validation-error"}, {"message", e.what()}, {"exit_code", 2}};
    std::cerr << err.dump() << '\n';
    return 2;
  }

  try {
    RunConfig cfg = parse_config(config);
    if (!out.empty()) cfg.outputs.directory = out;
    if (!epsilons.empty()) {
      if (!sweep->parsed()) throw Error(ErrorKind::validation, "--epsilons is only valid with sweep");
      cfg.sweep.epsilons = parse_list(epsilons);
      cfg.sweep.parameter = SweepParameter::epsilon;
    }
    const Log log(quiet);
    nlohmann::json result;
    if (profile->parsed()) result = profile_command(cfg, log);
    else if (simulate->parsed()) result = simulate_command(cfg, log);
    else if (audit->parsed()) result = audit_command(cfg, log);
    else result = sweep_command(cfg, log);
    if (!quiet) std::cout << "wrote " << cfg.outputs.directory.string() << '\n';
    return 0;
  } catch (const std::exception& e) {
    std::cerr << error_json(e).dump() << '\n';
    return exit_code(e);
  }
}

}  // namespace cw::app
