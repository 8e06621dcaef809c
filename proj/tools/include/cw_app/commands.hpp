#pragma once

#include <exception>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "cw/error.hpp"
#include "cw/profile.hpp"
#include "cw_app/config.hpp"

namespace cw::app {

class Log {
public:
  explicit Log(bool quiet = false) : quiet_(quiet) {}
  void info(const std::string& line) const;

private:
  bool quiet_;
};

// Each command writes into cfg.outputs.directory and returns its JSON summary.
nlohmann::json profile_command(const RunConfig& cfg, const Log& log = Log(true));
nlohmann::json simulate_command(const RunConfig& cfg, const Log& log = Log(true));
nlohmann::json audit_command(const RunConfig& cfg, const Log& log = Log(true));
nlohmann::json sweep_command(const RunConfig& cfg, const Log& log = Log(true));

// Simulation on an already solved profile, writing into dir.
nlohmann::json simulate_on(const RunConfig& cfg, const Profile& profile, const std::filesystem::path& dir,
                           const Log& log);

// 2 validation/parse, 3 numerical, 4 I/O.
int exit_code(ErrorKind kind);
nlohmann::json error_json(const std::exception& e);
int exit_code(const std::exception& e);

// CONGESTION_WAVES_THREADS caps the count; otherwise hardware concurrency.
unsigned sweep_threads(std::size_t jobs);

// Full command-line entry point.
int run_cli(int argc, const char* const* argv);

}  // namespace cw::app
