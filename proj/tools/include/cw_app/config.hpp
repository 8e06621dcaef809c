#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cw/diagnostics.hpp"
#include "cw/model.hpp"
#include "cw/numerics.hpp"
#include "cw/state.hpp"

namespace cw::app {

struct GridConfig {
  double xi_min = -10.0;
  double xi_max = 20.0;
  std::size_t n = 6001;
};

struct PerturbationConfig {
  PerturbationSpec spec;
  // When set, the amplitude is calibrated so that the smallness check reports this margin.
  std::optional<double> smallness_margin;
};

struct TimeConfig {
  double dt = 0.0;
  double t_end = 50.0;
  std::size_t snapshot_stride = 500;
  int picard_sweeps = 0;
};

struct DiagnosticsConfig {
  DiagnosticWeights weights{};
  double delta0 = 0.01;
  double envelope_tol = 1e-6;
};

struct OutputConfig {
  std::filesystem::path directory = "out";
  std::vector<std::string> formats{"csv", "json"};
  // Field CSV rows are written for every field_stride-th snapshot and node_stride-th node.
  std::size_t field_stride = 10;
  std::size_t node_stride = 1;

  bool wants(const std::string& format) const;
};

struct AuditConfig {
  double delta = 0.5;
  double alpha = 0.25;
  int k_max = 3;
  double v_bar = 0.0;  // <= 0 selects v_plus
};

enum class SweepParameter { epsilon, amplitude };

struct SweepConfig {
  SweepParameter parameter = SweepParameter::epsilon;
  std::vector<double> epsilons{0.4, 0.2, 0.1, 0.05};
  std::vector<double> amplitudes;
  double shock_half_width = 5.0;
  bool simulate = false;
  // Keep dx / epsilon fixed at its value for model.epsilon.
  bool scale_grid = false;
};

struct RunConfig {
  ModelParams model = ModelParams::defaults();
  GridConfig grid;
  PerturbationConfig perturbation;
  TimeConfig time;
  DiagnosticsConfig diagnostics;
  OutputConfig outputs;
  AuditConfig audit;
  SweepConfig sweep;

  Grid make_grid() const;
};

RunConfig default_config();
RunConfig parse_config_text(const std::string& text, const std::string& source = "<string>");
// "default" yields default_config().
RunConfig parse_config(const std::string& path);

}  // namespace cw::app
