#include "cw_app/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string_view>

#include "cw/error.hpp"

namespace cw::app {

namespace {

std::string where(const YAML::Node& n, const std::string& source) {
  const YAML::Mark m = n.Mark();
  if (m.is_null()) return source;
  return source + ":" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1);
}

class Reader {
public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void parse_fail(const YAML::Node& n, const std::string& msg) const {
    throw Error(ErrorKind::parse, where(n, source_) + ": " + msg);
  }
  [[noreturn]] void invalid(const YAML::Node& n, const std::string& path, const std::string& msg) const {
    throw Error(ErrorKind::validation, where(n, source_) + ": " + path + ": " + msg);
  }

  void check_keys(const YAML::Node& map, const std::string& section,
                  std::initializer_list<std::string_view> allowed) const {
    if (!map.IsMap()) parse_fail(map, "section '" + section + "' must be a mapping");
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        parse_fail(kv.first, "unknown key '" + (section.empty() ? key : section + "." + key) + "'");
    }
  }

  template <class T>
  T get(const YAML::Node& map, const char* key, const std::string& section, T fallback) const {
    const YAML::Node n = map[key];
    if (!n) return fallback;
    try {
      return n.as<T>();
    } catch (const YAML::BadConversion&) {
      parse_fail(n, "cannot read '" + section + "." + key + "' as the expected type");
    }
  }

  double number(const YAML::Node& map, const char* key, const std::string& section, double fallback) const {
    const double x = get<double>(map, key, section, fallback);
    if (!std::isfinite(x)) invalid(map[key], section + "." + key, "must be finite");
    return x;
  }

  std::size_t count(const YAML::Node& map, const char* key, const std::string& section, std::size_t fallback,
                    long long minimum) const {
    const long long x = get<long long>(map, key, section, static_cast<long long>(fallback));
    if (x < minimum) invalid(map[key], section + "." + key, "must be >= " + std::to_string(minimum));
    return static_cast<std::size_t>(x);
  }

  std::vector<double> numbers(const YAML::Node& map, const char* key, const std::string& section,
                              std::vector<double> fallback) const {
    const YAML::Node n = map[key];
    if (!n) return fallback;
    if (!n.IsSequence()) parse_fail(n, "'" + section + "." + key + "' must be a list");
    std::vector<double> out;
    for (const auto& item : n) {
      try {
        out.push_back(item.as<double>());
      } catch (const YAML::BadConversion&) {
        parse_fail(item, "'" + section + "." + key + "' entries must be numbers");
      }
      if (!std::isfinite(out.back())) invalid(item, section + "." + key, "entries must be finite");
    }
    return out;
  }

  const std::string& source() const { return source_; }

private:
  std::string source_;
};

void read_model(const Reader& r, const YAML::Node& node, RunConfig& cfg) {
  r.check_keys(node, "model", {"epsilon", "gamma", "v_plus", "u_plus", "u_minus"});
  const ModelParams& d = cfg.model;
  const double eps = r.number(node, "epsilon", "model", d.epsilon());
  const double gamma = r.number(node, "gamma", "model", d.gamma());
  const double v_plus = r.number(node, "v_plus", "model", d.v_plus());
  const double u_plus = r.number(node, "u_plus", "model", d.u_plus());
  const double u_minus = r.number(node, "u_minus", "model", d.u_minus());
  try {
    cfg.model = ModelParams(eps, gamma, v_plus, u_plus, u_minus);
  } catch (const Error& e) {
    r.invalid(node, "model", e.what());
  }
}

void read_grid(const Reader& r, const YAML::Node& node, RunConfig& cfg) {
  r.check_keys(node, "grid", {"xi_min", "xi_max", "n"});
  cfg.grid.xi_min = r.number(node, "xi_min", "grid", cfg.grid.xi_min);
  cfg.grid.xi_max = r.number(node, "xi_max", "grid", cfg.grid.xi_max);
  cfg.grid.n = r.count(node, "n", "grid", cfg.grid.n, 3);
  try {
    (void)cfg.make_grid();
  } catch (const Error& e) {
    r.invalid(node, "grid", e.what());
  }
}

PerturbationShape parse_shape(const Reader& r, const YAML::Node& n, const std::string& s) {
  if (s == "gaussian-dipole") return PerturbationShape::gaussian_dipole;
  if (s == "compact-bump-derivative") return PerturbationShape::compact_bump_derivative;
  if (s == "custom-samples") return PerturbationShape::custom_samples;
  r.invalid(n, "perturbation.shape",
            "must be one of gaussian-dipole, compact-bump-derivative, custom-samples (got '" + s + "')");
}

void read_perturbation(const Reader& r, const YAML::Node& node, RunConfig& cfg) {
  r.check_keys(node, "perturbation",
               {"shape", "amplitude", "smallness_margin", "center", "width", "applies_to", "custom_potential"});
  auto& p = cfg.perturbation;
  if (node["shape"]) p.spec.shape = parse_shape(r, node["shape"], r.get<std::string>(node, "shape", "perturbation", ""));
  p.spec.amplitude = r.number(node, "amplitude", "perturbation", p.spec.amplitude);
  p.spec.center = r.number(node, "center", "perturbation", p.spec.center);
  p.spec.width = r.number(node, "width", "perturbation", p.spec.width);
  if (!(p.spec.width > 0.0)) r.invalid(node["width"], "perturbation.width", "must be > 0");
  if (node["applies_to"]) {
    const auto a = r.get<std::string>(node, "applies_to", "perturbation", "");
    if (a == "v-only")
      p.spec.applies_to = AppliesTo::v_only;
    else if (a == "v-and-w")
      p.spec.applies_to = AppliesTo::v_and_w;
    else
      r.invalid(node["applies_to"], "perturbation.applies_to", "must be v-only or v-and-w (got '" + a + "')");
  }
  if (node["smallness_margin"]) {
    if (node["amplitude"])
      r.invalid(node["smallness_margin"], "perturbation",
                "amplitude and smallness_margin are mutually exclusive");
    const double m = r.number(node, "smallness_margin", "perturbation", 0.5);
    if (!(m > 0.0)) r.invalid(node["smallness_margin"], "perturbation.smallness_margin", "must be > 0");
    p.smallness_margin = m;
  }
  p.spec.custom_potential = r.numbers(node, "custom_potential", "perturbation", {});
  if (p.spec.shape == PerturbationShape::custom_samples && p.spec.custom_potential.empty())
    r.invalid(node, "perturbation.custom_potential", "required for shape custom-samples");
  if (p.spec.shape != PerturbationShape::custom_samples && !p.spec.custom_potential.empty())
    r.invalid(node["custom_potential"], "perturbation.custom_potential", "only allowed for shape custom-samples");
}

void read_time(const Reader& r, const YAML::Node& node, RunConfig& cfg) {
  r.check_keys(node, "time", {"dt", "t_end", "snapshot_stride", "picard_sweeps"});
  auto& t = cfg.time;
  t.dt = r.number(node, "dt", "time", t.dt);
  if (t.dt < 0.0) r.invalid(node["dt"], "time.dt", "must be >= 0 (0 selects the default step)");
  t.t_end = r.number(node, "t_end", "time", t.t_end);
  if (t.t_end < 0.0) r.invalid(node["t_end"], "time.t_end", "must be >= 0");
  t.snapshot_stride = r.count(node, "snapshot_stride", "time", t.snapshot_stride, 1);
  t.picard_sweeps = static_cast<int>(r.count(node, "picard_sweeps", "time", t.picard_sweeps, 0));
  if (t.picard_sweeps > 3) r.invalid(node["picard_sweeps"], "time.picard_sweeps", "must be <= 3");
}

void read_diagnostics(const Reader& r, const YAML::Node& node, RunConfig& cfg) {
  r.check_keys(node, "diagnostics", {"c0", "c1", "c2", "delta0", "envelope_tol"});
  auto& d = cfg.diagnostics;
  for (auto [key, slot] : {std::pair{"c0", &d.weights.c0}, {"c1", &d.weights.c1}, {"c2", &d.weights.c2},
                           {"delta0", &d.delta0}, {"envelope_tol", &d.envelope_tol}}) {
    *slot = r.number(node, key, "diagnostics", *slot);
    if (!(*slot > 0.0)) r.invalid(node[key], std::string("diagnostics.") + key, "must be > 0");
  }
}

void read_outputs(const Reader& r, const YAML::Node& node, RunConfig& cfg) {
  r.check_keys(node, "outputs", {"directory", "formats", "field_stride", "node_stride"});
  auto& o = cfg.outputs;
  o.directory = r.get<std::string>(node, "directory", "outputs", o.directory.string());
  if (const YAML::Node f = node["formats"]) {
    if (!f.IsSequence()) r.parse_fail(f, "'outputs.formats' must be a list");
    o.formats.clear();
    for (const auto& item : f) {
      const auto name = item.as<std::string>();
      if (name != "csv" && name != "json" && name != "ratios")
        r.invalid(item, "outputs.formats", "unknown format '" + name + "' (csv, json, ratios)");
      o.formats.push_back(name);
    }
  }
  o.field_stride = r.count(node, "field_stride", "outputs", o.field_stride, 1);
  o.node_stride = r.count(node, "node_stride", "outputs", o.node_stride, 1);
}

void read_audit(const Reader& r, const YAML::Node& node, RunConfig& cfg) {
  r.check_keys(node, "audit", {"delta", "alpha", "k_max", "v_bar"});
  auto& a = cfg.audit;
  a.delta = r.number(node, "delta", "audit", a.delta);
  if (!(a.delta > 0.0 && a.delta < 1.0)) r.invalid(node["delta"], "audit.delta", "must satisfy 0 < delta < 1");
  a.alpha = r.number(node, "alpha", "audit", a.alpha);
  if (!(a.alpha > 0.0 && a.alpha < 1.0)) r.invalid(node["alpha"], "audit.alpha", "must satisfy 0 < alpha < 1");
  a.k_max = static_cast<int>(r.count(node, "k_max", "audit", a.k_max, 1));
  if (a.k_max > 3) r.invalid(node["k_max"], "audit.k_max", "must be <= 3");
  a.v_bar = r.number(node, "v_bar", "audit", a.v_bar);
  if (a.v_bar > 0.0 && !(a.v_bar > 1.0)) r.invalid(node["v_bar"], "audit.v_bar", "must be > 1 (or <= 0 for v_plus)");
}

void read_sweep(const Reader& r, const YAML::Node& node, RunConfig& cfg) {
  r.check_keys(node, "sweep",
               {"parameter", "epsilons", "amplitudes", "shock_half_width", "simulate", "scale_grid"});
  auto& s = cfg.sweep;
  if (node["parameter"]) {
    const auto p = r.get<std::string>(node, "parameter", "sweep", "");
    if (p == "epsilon")
      s.parameter = SweepParameter::epsilon;
    else if (p == "amplitude")
      s.parameter = SweepParameter::amplitude;
    else
      r.invalid(node["parameter"], "sweep.parameter", "must be epsilon or amplitude (got '" + p + "')");
  }
  s.epsilons = r.numbers(node, "epsilons", "sweep", s.epsilons);
  for (double e : s.epsilons)
    if (!(e > 0.0)) r.invalid(node["epsilons"], "sweep.epsilons", "epsilon must be > 0");
  s.amplitudes = r.numbers(node, "amplitudes", "sweep", s.amplitudes);
  s.shock_half_width = r.number(node, "shock_half_width", "sweep", s.shock_half_width);
  if (!(s.shock_half_width > 0.0)) r.invalid(node["shock_half_width"], "sweep.shock_half_width", "must be > 0");
  s.simulate = r.get<bool>(node, "simulate", "sweep", s.simulate);
  s.scale_grid = r.get<bool>(node, "scale_grid", "sweep", s.scale_grid);
  if (s.parameter == SweepParameter::amplitude && s.amplitudes.empty())
    r.invalid(node, "sweep.amplitudes", "required when sweep.parameter is amplitude");
}

}  // namespace

bool OutputConfig::wants(const std::string& format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

Grid RunConfig::make_grid() const { return Grid(grid.xi_min, grid.xi_max, grid.n); }

RunConfig default_config() { return RunConfig{}; }

RunConfig parse_config_text(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw Error(ErrorKind::parse, source + ":" + std::to_string(e.mark.line + 1) + ":" +
                                      std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
  RunConfig cfg = default_config();
  if (root.IsNull()) return cfg;
  const Reader r(source);
  r.check_keys(root, "", {"model", "grid", "perturbation", "time", "diagnostics", "outputs", "audit", "sweep"});
  if (root["model"]) read_model(r, root["model"], cfg);
  if (root["grid"]) read_grid(r, root["grid"], cfg);
  if (root["perturbation"]) read_perturbation(r, root["perturbation"], cfg);
  if (root["time"]) read_time(r, root["time"], cfg);
  if (root["diagnostics"]) read_diagnostics(r, root["diagnostics"], cfg);
  if (root["outputs"]) read_outputs(r, root["outputs"], cfg);
  if (root["audit"]) read_audit(r, root["audit"], cfg);
  if (root["sweep"]) read_sweep(r, root["sweep"], cfg);

  const auto& pot = cfg.perturbation.spec.custom_potential;
  if (!pot.empty() && pot.size() != cfg.grid.n)
    r.invalid(root["perturbation"]["custom_potential"], "perturbation.custom_potential",
              "needs one value per grid node (" + std::to_string(cfg.grid.n) + ")");
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  if (path == "default") return default_config();
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

}  // namespace cw::app
