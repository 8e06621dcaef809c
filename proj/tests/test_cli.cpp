#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "cw_app/commands.hpp"
#include "cw_app/config.hpp"

using namespace cw;
using namespace cw::app;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cw_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "congestion_waves");
  args.push_back("--quiet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

ErrorKind parse_kind(const std::string& text, std::string* message = nullptr) {
  try {
    parse_config_text(text, "cfg.yaml");
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::io;
}

const char* small_sim = R"(
model: {epsilon: 0.1}
grid: {xi_min: -5, xi_max: 5, n: 1001}
perturbation: {smallness_margin: 0.5}
time: {t_end: 0.5, snapshot_stride: 100}
outputs: {field_stride: 2, node_stride: 10}
)";

}  // namespace

TEST_CASE("config parsing") {
  const RunConfig minimal = parse_config_text("model:\n  epsilon: 0.2\n");
  CHECK(minimal.model.epsilon() == 0.2);
  CHECK(minimal.grid.n == 6001);
  CHECK(minimal.time.t_end == 50.0);
  CHECK(minimal.diagnostics.delta0 == 0.01);
  CHECK(minimal.outputs.wants("csv"));

  const RunConfig empty = parse_config_text("");
  CHECK(empty.model.gamma() == 1.0);
  CHECK(parse_config("default").grid.xi_max == 20.0);

  std::string msg;
  CHECK(parse_kind("model:\n  gamma: 0.5\n", &msg) == ErrorKind::validation);
  CHECK(msg.find("gamma") != std::string::npos);
  CHECK(parse_kind("model:\n  u_minus: -1\n  u_plus: 0\n", &msg) == ErrorKind::validation);
  CHECK(msg.find("u_minus") != std::string::npos);

  CHECK(parse_kind("model:\n  epsilon: 0.1\n  epsilonn: 0.2\n", &msg) == ErrorKind::parse);
  CHECK(msg.find("epsilonn") != std::string::npos);
  CHECK(msg.find("cfg.yaml:3") != std::string::npos);
  CHECK(parse_kind("bogus: 1\n") == ErrorKind::parse);
  CHECK(parse_kind("model: [1, 2\n") == ErrorKind::parse);
  CHECK(parse_kind("model:\n  epsilon: abc\n", &msg) == ErrorKind::parse);
  CHECK(msg.find("cfg.yaml:2") != std::string::npos);

  CHECK(parse_kind("grid: {n: 2}\n") == ErrorKind::validation);
  CHECK(parse_kind("grid: {xi_min: 1, xi_max: 0}\n") == ErrorKind::validation);
  CHECK(parse_kind("perturbation: {amplitude: 0.1, smallness_margin: 0.5}\n") == ErrorKind::validation);
  CHECK(parse_kind("perturbation: {shape: square}\n") == ErrorKind::validation);
  CHECK(parse_kind("perturbation: {shape: custom-samples, custom_potential: [0, 1, 0]}\n") == ErrorKind::validation);
  CHECK(parse_kind("time: {picard_sweeps: 4}\n") == ErrorKind::validation);
  CHECK(parse_kind("outputs: {formats: [xml]}\n") == ErrorKind::validation);
  CHECK(parse_kind("audit: {delta: 1.0}\n") == ErrorKind::validation);
  CHECK(parse_kind("sweep: {parameter: gamma}\n") == ErrorKind::validation);

  const RunConfig custom = parse_config_text(
      "grid: {xi_min: 0, xi_max: 1, n: 3}\nperturbation: {shape: custom-samples, amplitude: 2, custom_potential: [0, 1, 0]}\n");
  CHECK(custom.perturbation.spec.shape == PerturbationShape::custom_samples);
  CHECK(custom.perturbation.spec.custom_potential.size() == 3);

  const RunConfig full = parse_config_text(R"(
model: {epsilon: 0.05, gamma: 2, v_plus: 3, u_plus: 0.5, u_minus: 2}
perturbation: {shape: compact-bump-derivative, amplitude: 0.001, center: 2, width: 0.5, applies_to: v-and-w}
time: {dt: 0.001, t_end: 3, snapshot_stride: 7, picard_sweeps: 2}
diagnostics: {c0: 1, c1: 2, c2: 3, delta0: 0.02, envelope_tol: 1e-5}
outputs: {directory: somewhere, formats: [json, ratios]}
audit: {delta: 0.6, alpha: 0.1, k_max: 2, v_bar: 2.5}
sweep: {parameter: amplitude, amplitudes: [0.001, 0.002], simulate: true, scale_grid: true}
)");
  CHECK(full.model.s() == doctest::Approx(0.75));
  CHECK(full.perturbation.spec.applies_to == AppliesTo::v_and_w);
  CHECK(full.time.picard_sweeps == 2);
  CHECK(full.diagnostics.weights.c2 == 3.0);
  CHECK_FALSE(full.outputs.wants("csv"));
  CHECK(full.outputs.wants("ratios"));
  CHECK(full.audit.k_max == 2);
  CHECK(full.sweep.parameter == SweepParameter::amplitude);
  CHECK(full.sweep.amplitudes.size() == 2);

  try {
    parse_config("/nonexistent/cw.yaml");
    FAIL("expected io error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::io);
  }
}

TEST_CASE("profile subcommand") {
  const fs::path dir = scratch("profile");
  REQUIRE(cli({"profile", "--config", "default", "--out", dir.string()}) == 0);
  CHECK(fs::exists(dir / "profile.csv"));
  const auto report = read_json(dir / "bound_report.json");
  CHECK(report["pass"] == true);
  CHECK(report["regions"].size() == 3);
  std::istringstream csv(slurp(dir / "profile.csv"));
  std::string header;
  std::getline(csv, header);
  CHECK(header == "xi,v_eps,u_eps,w_eps,lower_bound,upper_bound");
  std::size_t rows = 0;
  for (std::string line; std::getline(csv, line);) ++rows;
  CHECK(rows == 6001);
}

TEST_CASE("simulate subcommand") {
  const fs::path dir = scratch("simulate");
  const fs::path cfg = write_file(dir / "cfg.yaml", small_sim);
  REQUIRE(cli({"simulate", "--config", cfg.string(), "--out", (dir / "a").string()}) == 0);
  for (const char* f : {"fields.csv", "energy_ledger.csv", "decay_metrics.csv", "summary.json"})
    CHECK(fs::exists(dir / "a" / f));
  const auto s = read_json(dir / "a" / "summary.json");
  CHECK(s["smallness"]["margin"].get<double>() == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(s["max_mass_v_drift"].get<double>() < 1e-8);
  CHECK(s["sup_v_ratio"].get<double>() < 1.0);

  // Determinism: a second run produces identical bytes.
  REQUIRE(cli({"simulate", "--config", cfg.string(), "--out", (dir / "b").string()}) == 0);
  for (const char* f : {"fields.csv", "energy_ledger.csv", "decay_metrics.csv", "summary.json"})
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));

  // Zero amplitude: decay metrics start at zero and stay at the O(dx^2) steady-state drift.
  const fs::path zero = write_file(dir / "zero.yaml", R"(
grid: {xi_min: -5, xi_max: 5, n: 1001}
perturbation: {amplitude: 0}
time: {t_end: 0.2, snapshot_stride: 50}
)");
  REQUIRE(cli({"simulate", "--config", zero.string(), "--out", (dir / "z").string()}) == 0);
  std::istringstream decay(slurp(dir / "z" / "decay_metrics.csv"));
  std::string line;
  std::getline(decay, line);
  CHECK(line == "t,sup_v_dev,sup_u_dev,e0,x_norm_partial");
  std::size_t rows = 0;
  while (std::getline(decay, line)) {
    ++rows;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    while (std::getline(ss, cell, ',')) CHECK(std::abs(std::stod(cell)) < (rows == 1 ? 1e-300 : 10.0 * 0.01 * 0.01));
  }
  CHECK(rows == 5);
}

TEST_CASE("audit subcommand") {
  const fs::path dir = scratch("audit");
  const fs::path cfg = write_file(dir / "cfg.yaml", R"(
grid: {xi_min: -5, xi_max: 5, n: 2001}
outputs: {formats: [json, ratios]}
)");
  REQUIRE(cli({"audit", "--config", cfg.string(), "--out", dir.string()}) == 0);
  const auto a = read_json(dir / "audit.json");
  CHECK(a["pass"] == true);
  std::vector<std::string> ids;
  for (const auto& r : a["reports"]) ids.push_back(r["lemma_id"]);
  for (const char* id : {"veps_derivative_k1", "veps_derivative_k3", "psi_derivative_k2", "H", "dx2H",
                         "linear_estimate_L", "linear_estimate_C"})
    CHECK(std::find(ids.begin(), ids.end(), id) != ids.end());
  CHECK(fs::exists(dir / "ratio_profiles.csv"));
}

TEST_CASE("sweep subcommand") {
  const fs::path dir = scratch("sweep");
  REQUIRE(cli({"sweep", "--epsilons", "0.4,0.2,0.1,0.05", "--out", dir.string()}) == 0);
  const auto s = read_json(dir / "summary.json");
  CHECK(s["shock_limit_monotone"] == true);
  REQUIRE(s["rows"].size() == 4);
  for (const auto& row : s["rows"]) {
    CHECK(row["envelope_pass"] == true);
    CHECK(fs::exists(dir / row["directory"].get<std::string>() / "profile.csv"));
  }
  CHECK(fs::exists(dir / "summary.csv"));

  const fs::path again = scratch("sweep_again");
  REQUIRE(cli({"sweep", "--epsilons", "0.4,0.2,0.1,0.05", "--out", again.string()}) == 0);
  CHECK(slurp(dir / "summary.csv") == slurp(again / "summary.csv"));
  CHECK(slurp(dir / "summary.json") == slurp(again / "summary.json"));
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch("errors");
  CHECK(cli({}) == 2);
  CHECK(cli({"profile", "--bogus"}) == 2);
  CHECK(cli({"profile", "--epsilons", "0.1", "--out", dir.string()}) == 2);
  CHECK(cli({"sweep", "--epsilons", "0.1,abc", "--out", dir.string()}) == 2);
  CHECK(cli({"profile", "--config", (dir / "missing.yaml").string()}) == 4);
  CHECK(cli({"profile", "--config", write_file(dir / "bad.yaml", "model: {gamma: 0.5}\n").string()}) == 2);
  CHECK(cli({"profile", "--config", write_file(dir / "typo.yaml", "modle: {}\n").string()}) == 2);

  const fs::path congested = write_file(dir / "congested.yaml", R"(
grid: {xi_min: -5, xi_max: 5, n: 1001}
perturbation: {amplitude: 0.2, center: -3}
time: {t_end: 0.1}
)");
  CHECK(cli({"simulate", "--config", congested.string(), "--out", (dir / "c").string()}) == 3);

  write_file(dir / "blocker", "x");
  CHECK(cli({"profile", "--out", (dir / "blocker" / "sub").string()}) == 4);

  CHECK(exit_code(ErrorKind::validation) == 2);
  CHECK(exit_code(ErrorKind::parse) == 2);
  CHECK(exit_code(ErrorKind::congestion) == 3);
  CHECK(exit_code(ErrorKind::solver_failure) == 3);
  CHECK(exit_code(ErrorKind::io) == 4);
  const auto j = error_json(CongestionError("boom", 1.0, 3, -2.0, 0.99));
  CHECK(j["error"] == "congestion-error");
  CHECK(j["congestion"]["index"] == 3);
}
