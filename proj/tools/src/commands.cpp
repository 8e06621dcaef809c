#include "cw_app/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

#include "cw/audit.hpp"
#include "cw/diagnostics.hpp"
#include "cw/pde.hpp"
#include "cw_app/output.hpp"

namespace cw::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::mutex log_mutex;

json params_json(const ModelParams& p) {
  return {{"epsilon", p.epsilon()}, {"gamma", p.gamma()}, {"v_plus", p.v_plus()},
          {"u_plus", p.u_plus()},   {"u_minus", p.u_minus()}, {"s", p.s()}};
}

json grid_json(const Grid& g) { return {{"xi_min", g.xi_min()}, {"xi_max", g.xi_max()}, {"n", g.n()}, {"dx", g.dx()}}; }

json bound_json(const EnvelopeCheck& check, double tol) {
  json regions = json::array();
  for (const auto& r : check.regions)
    regions.push_back({{"region", to_string(r.region)},
                       {"max_lower_violation", number(r.max_lower_violation)},
                       {"max_upper_violation", number(r.max_upper_violation)},
                       {"pass", r.pass}});
  return {{"pass", check.pass()}, {"tolerance", tol}, {"regions", regions}};
}

json energy_json(const EnergyReport& r) {
  return {{"t", r.t},           {"e0", number(r.e0)},
          {"e1", number(r.e1)}, {"e2", number(r.e2)},
          {"d0", number(r.d0)}, {"d1", number(r.d1)},
          {"d2", number(r.d2)}, {"int_d0", number(r.int_d0)},
          {"int_d1", number(r.int_d1)}, {"int_d2", number(r.int_d2)},
          {"x_norm_sq", number(r.x_norm_sq)}, {"sup_v_dev", number(r.sup_v_dev)},
          {"sup_u_dev", number(r.sup_u_dev)}, {"mass_v", number(r.mass_v)},
          {"mass_u", number(r.mass_u)}};
}

json audit_json(const AuditReport& r) {
  return {{"lemma_id", r.lemma_id},
          {"fitted_constant", number(r.fitted_constant)},
          {"fitted_refined", number(r.fitted_refined)},
          {"refinement_ratio", number(r.refinement_ratio)},
          {"pass", r.pass},
          {"worst", {{"xi", number(r.worst.xi)}, {"lhs", number(r.worst.lhs)}, {"rhs", number(r.worst.rhs)},
                     {"member", r.worst.member}}}};
}

json write_profile(const RunConfig& cfg, const Profile& profile, const fs::path& dir) {
  ensure_directory(dir);
  const ModelParams& p = profile.params();
  const EnvelopeConstants c = envelope_constants(p);
  const EnvelopeCheck check = verify_envelopes(profile, c, cfg.diagnostics.envelope_tol);
  if (cfg.outputs.wants("csv")) {
    CsvWriter csv(dir / "profile.csv", {"xi", "v_eps", "u_eps", "w_eps", "lower_bound", "upper_bound"});
    const Grid& g = profile.grid();
    for (std::size_t i = 0; i < g.n(); ++i) {
      const auto [lo, hi] = envelope_bounds(g.x(i) - profile.anchor_xi(), p, c);
      csv.row({g.x(i), profile.v_eps()[i], profile.u_eps()[i], profile.w_eps()[i], lo, hi});
    }
    csv.close();
  }
  json report = bound_json(check, cfg.diagnostics.envelope_tol);
  report["params"] = params_json(p);
  report["envelope_constants"] = {{"a0", c.a0}, {"a1", c.a1}, {"a2", c.a2}, {"a3", c.a3}, {"b", c.b}};
  report["grid"] = grid_json(profile.grid());
  if (cfg.outputs.wants("json")) write_json(dir / "bound_report.json", report);
  return report;
}

std::string tag(const std::string& prefix, double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return prefix + buf;
}

RunConfig with_epsilon(const RunConfig& cfg, double eps) {
  RunConfig out = cfg;
  out.model = cfg.model.with_epsilon(eps);
  if (cfg.sweep.scale_grid) {
    const double cells = static_cast<double>(cfg.grid.n - 1) * cfg.model.epsilon() / eps;
    out.grid.n = static_cast<std::size_t>(std::llround(cells)) + 1;
  }
  return out;
}

// Runs job(i) for i in [0, count) on a small thread pool; the first exception per index is kept.
template <class Job>
std::vector<std::exception_ptr> parallel_for(std::size_t count, Job job) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = sweep_threads(count);
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return errors;
}

}  // namespace

void Log::info(const std::string& line) const {
  if (quiet_) return;
  std::lock_guard lock(log_mutex);
  std::cerr << line << '\n';
}

unsigned sweep_threads(std::size_t jobs) {
  unsigned cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CONGESTION_WAVES_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) cap = static_cast<unsigned>(v);
  }
  return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(cap, jobs)));
}

json profile_command(const RunConfig& cfg, const Log& log) {
  const Profile profile = solve_profile(cfg.model, cfg.make_grid());
  json report = write_profile(cfg, profile, cfg.outputs.directory);
  log.info(std::string("profile: envelopes ") + (report["pass"].get<bool>() ? "pass" : "FAIL"));
  return report;
}

json simulate_on(const RunConfig& cfg, const Profile& profile, const fs::path& dir, const Log& log) {
  ensure_directory(dir);
  const ModelParams& p = profile.params();
  const Grid& g = profile.grid();
  const auto& weights = cfg.diagnostics.weights;
  const double horizon = cfg.time.t_end;

  PerturbationSpec spec = cfg.perturbation.spec;
  if (cfg.perturbation.smallness_margin)
    spec.amplitude = calibrate_amplitude(profile, spec, horizon, cfg.diagnostics.delta0, weights,
                                         *cfg.perturbation.smallness_margin);
  const State s0 = initial_state(profile, spec);
  const IntegratedFields f0 = integrated_fields(s0, profile);
  const EnergyReport r0 = energies(s0, profile, weights);
  const SmallnessResult sm = smallness_check(r0, f0.W0, g, p, horizon, cfg.diagnostics.delta0, weights);

  RunOptions ro;
  ro.t_end = cfg.time.t_end;
  ro.dt = cfg.time.dt > 0.0 ? cfg.time.dt : default_dt(g, p);
  ro.snapshot_stride = cfg.time.snapshot_stride;
  ro.weights = weights;
  ro.step.picard_sweeps = cfg.time.picard_sweeps;
  ro.keep_states = false;

  const bool csv = cfg.outputs.wants("csv");
  std::optional<CsvWriter> fields;
  if (csv) fields.emplace(dir / "fields.csv", std::vector<std::string>{"t", "xi", "v", "w", "u", "v_eps"});
  std::size_t index = 0;
  bool last_written = false;
  std::optional<State> last;
  auto write_fields = [&](const State& st) {
    const Field u = reconstruct_u(st, profile);
    for (std::size_t i = 0; i < g.n(); i += cfg.outputs.node_stride)
      fields->row({st.t, g.x(i), st.v[i], st.w[i], u[i], profile.v_eps()[i]});
  };
  const Observer observer = [&](const Snapshot& snap) {
    last_written = csv && index % cfg.outputs.field_stride == 0;
    if (last_written) write_fields(snap.state);
    else last = snap.state;
    ++index;
  };
  log.info(tag("simulate: eps=", p.epsilon()) + tag(" amplitude=", spec.amplitude) + tag(" t_end=", ro.t_end));
  const Trajectory traj = run(s0, profile, ro, std::span<const Observer>(&observer, 1));
  if (csv) {
    if (!last_written && last) write_fields(*last);
    fields->close();
  }

  const auto& snaps = traj.snapshots;
  const EnergyReport& first = snaps.front().energy;
  const EnergyReport& final = snaps.back().energy;
  double mass_v_drift = 0.0, mass_u_drift = 0.0, dissipation = 0.0;
  for (const auto& s : snaps) {
    mass_v_drift = std::max(mass_v_drift, std::abs(s.energy.mass_v - first.mass_v));
    mass_u_drift = std::max(mass_u_drift, std::abs(s.energy.mass_u - first.mass_u));
    if (first.e0 > 0.0) dissipation = std::max(dissipation, (s.energy.e0 + 2.0 * s.energy.int_d0) / first.e0);
  }
  if (csv) {
    CsvWriter ledger(dir / "energy_ledger.csv",
                     {"t", "e0", "e1", "e2", "d0", "d1", "d2", "int_d0", "int_d1", "int_d2", "x_norm_sq",
                      "sup_v_dev", "sup_u_dev", "mass_v", "mass_u"});
    for (const auto& s : snaps) {
      const auto& r = s.energy;
      ledger.row({r.t, r.e0, r.e1, r.e2, r.d0, r.d1, r.d2, r.int_d0, r.int_d1, r.int_d2, r.x_norm_sq, r.sup_v_dev,
                  r.sup_u_dev, r.mass_v, r.mass_u});
    }
    ledger.close();
    CsvWriter decay(dir / "decay_metrics.csv", {"t", "sup_v_dev", "sup_u_dev", "e0", "x_norm_partial"});
    for (const auto& d : decay_metrics(traj)) decay.row({d.t, d.sup_v_dev, d.sup_u_dev, d.e0, d.x_norm_partial});
    decay.close();
  }

  auto ratio = [](double a, double b) { return b > 0.0 ? number(a / b) : json(nullptr); };
  json summary = {
      {"params", params_json(p)},
      {"grid", grid_json(g)},
      {"amplitude", spec.amplitude},
      {"applies_to", to_string(spec.applies_to)},
      {"shape", to_string(spec.shape)},
      {"smallness",
       {{"lhs", number(sm.lhs)}, {"threshold", number(sm.threshold)}, {"margin", number(sm.margin)},
        {"pass", sm.pass}, {"delta0", cfg.diagnostics.delta0}, {"horizon", horizon}}},
      {"dt", ro.dt},
      {"steps", traj.steps},
      {"snapshots", snaps.size()},
      {"contamination_time", traj.contamination_time >= 0.0 ? json(traj.contamination_time) : json(nullptr)},
      {"tail_truncation_bound", number(f0.tail_truncation_bound)},
      {"initial", energy_json(first)},
      {"final", energy_json(final)},
      {"sup_v_ratio", ratio(final.sup_v_dev, first.sup_v_dev)},
      {"sup_u_ratio", ratio(final.sup_u_dev, first.sup_u_dev)},
      {"max_mass_v_drift", number(mass_v_drift)},
      {"max_mass_u_drift", number(mass_u_drift)},
      {"max_dissipation_ratio", first.e0 > 0.0 ? number(dissipation) : json(nullptr)},
      {"x_norm_sup", number(final.x_norm_sq)},
  };
  if (cfg.outputs.wants("json")) write_json(dir / "summary.json", summary);
  if (traj.contamination_time >= 0.0)
    log.info(tag("simulate: warning: perturbation reached the boundary band at t=", traj.contamination_time));
  return summary;
}

json simulate_command(const RunConfig& cfg, const Log& log) {
  const Profile profile = solve_profile(cfg.model, cfg.make_grid());
  return simulate_on(cfg, profile, cfg.outputs.directory, log);
}

json audit_command(const RunConfig& cfg, const Log& log) {
  const fs::path dir = cfg.outputs.directory;
  ensure_directory(dir);
  const Profile profile = solve_profile(cfg.model, cfg.make_grid());
  const bool want_ratios = cfg.outputs.wants("ratios");
  std::vector<RatioProfile> ratios;
  std::vector<AuditReport> reports = audit_veps_derivatives(profile, cfg.audit.k_max, want_ratios ? &ratios : nullptr);
  const double v_bar = cfg.audit.v_bar > 0.0 ? cfg.audit.v_bar : cfg.model.v_plus();
  for (auto& r : audit_psi_derivatives(cfg.model, v_bar)) reports.push_back(std::move(r));
  for (auto& r : audit_h_bounds(profile, cfg.audit.delta, {}, want_ratios ? &ratios : nullptr))
    reports.push_back(std::move(r));
  for (auto& r : audit_linear_operator_bounds(profile, cfg.audit.alpha)) reports.push_back(std::move(r));

  json list = json::array();
  bool all = true;
  for (const auto& r : reports) {
    list.push_back(audit_json(r));
    all = all && r.pass;
    log.info("audit: " + r.lemma_id + tag(" C=", r.fitted_constant) + tag(" ratio=", r.refinement_ratio) +
             (r.pass ? " pass" : " FAIL"));
  }
  json out = {{"params", params_json(cfg.model)},
              {"grid", grid_json(profile.grid())},
              {"delta", cfg.audit.delta},
              {"alpha", cfg.audit.alpha},
              {"reports", list},
              {"pass", all}};
  if (cfg.outputs.wants("json")) write_json(dir / "audit.json", out);
  if (want_ratios) {
    CsvWriter csv(dir / "ratio_profiles.csv", {"lemma_id", "member", "xi", "ratio"});
    for (const auto& rp : ratios)
      for (std::size_t i = 0; i < rp.xi.size(); ++i)
        csv.row(rp.lemma_id, {static_cast<double>(rp.member), rp.xi[i], rp.ratio[i]});
    csv.close();
  }
  return out;
}

json sweep_command(const RunConfig& cfg, const Log& log) {
  const fs::path dir = cfg.outputs.directory;
  ensure_directory(dir);
  const bool by_eps = cfg.sweep.parameter == SweepParameter::epsilon;
  const auto& values = by_eps ? cfg.sweep.epsilons : cfg.sweep.amplitudes;
  std::vector<json> rows(values.size());

  std::optional<Profile> shared;
  if (!by_eps) shared.emplace(solve_profile(cfg.model, cfg.make_grid()));

  const auto errors = parallel_for(values.size(), [&](std::size_t i) {
    const double x = values[i];
    if (by_eps) {
      const RunConfig local = with_epsilon(cfg, x);
      const fs::path sub = dir / tag("eps_", x);
      const Profile profile = solve_profile(local.model, local.make_grid());
      const json bounds = write_profile(local, profile, sub);
      const std::array<double, 1> eps{x};
      const double l1 = shock_limit_error(local.model, eps, cfg.sweep.shock_half_width).front().l1_error;
      json row = {{"epsilon", x}, {"n", local.grid.n}, {"shock_l1_error", number(l1)},
                  {"envelope_pass", bounds["pass"]}, {"directory", sub.filename().string()}};
      if (cfg.sweep.simulate) {
        const json sim = simulate_on(local, profile, sub, log);
        row["amplitude"] = sim["amplitude"];
        row["x_norm_sup"] = sim["x_norm_sup"];
        row["x_norm_sup_over_eps3"] = number(sim["x_norm_sup"].get<double>() / (x * x * x));
        row["sup_v_ratio"] = sim["sup_v_ratio"];
        row["sup_u_ratio"] = sim["sup_u_ratio"];
        row["max_dissipation_ratio"] = sim["max_dissipation_ratio"];
      }
      log.info(tag("sweep: eps=", x) + tag(" L1=", l1));
      rows[i] = std::move(row);
    } else {
      RunConfig local = cfg;
      local.perturbation.smallness_margin.reset();
      local.perturbation.spec.amplitude = x;
      const fs::path sub = dir / tag("amp_", x);
      const json sim = simulate_on(local, *shared, sub, log);
      rows[i] = {{"amplitude", x},
                 {"smallness_margin", sim["smallness"]["margin"]},
                 {"x_norm_sup", sim["x_norm_sup"]},
                 {"sup_v_ratio", sim["sup_v_ratio"]},
                 {"sup_u_ratio", sim["sup_u_ratio"]},
                 {"max_dissipation_ratio", sim["max_dissipation_ratio"]},
                 {"directory", sub.filename().string()}};
    }
  });

  json failures = json::array();
  int code = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!errors[i]) {
      rows[i]["status"] = "ok";
      continue;
    }
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      json err = error_json(e);
      rows[i] = {{by_eps ? "epsilon" : "amplitude", values[i]}, {"status", err["error"]}, {"message", err["message"]}};
      failures.push_back(err);
      if (code == 0) code = exit_code(e);
    }
  }

  const std::vector<std::string> cols =
      by_eps ? (cfg.sweep.simulate
                    ? std::vector<std::string>{"epsilon", "n", "shock_l1_error", "envelope_pass", "amplitude",
                                               "x_norm_sup", "x_norm_sup_over_eps3", "sup_v_ratio", "sup_u_ratio",
                                               "max_dissipation_ratio"}
                    : std::vector<std::string>{"epsilon", "n", "shock_l1_error", "envelope_pass"})
             : std::vector<std::string>{"amplitude", "smallness_margin", "x_norm_sup", "sup_v_ratio", "sup_u_ratio",
                                        "max_dissipation_ratio"};
  auto cell = [](const json& row, const std::string& key) {
    const auto it = row.find(key);
    if (it == row.end() || it->is_null()) return std::nan("");
    if (it->is_boolean()) return it->get<bool>() ? 1.0 : 0.0;
    return it->get<double>();
  };
  if (cfg.outputs.wants("csv")) {
    CsvWriter csv(dir / "summary.csv", cols);
    for (const auto& row : rows) {
      std::vector<double> vals;
      for (const auto& c : cols) vals.push_back(cell(row, c));
      csv.row(vals);
    }
    csv.close();
  }

  json summary = {{"parameter", by_eps ? "epsilon" : "amplitude"}, {"params", params_json(cfg.model)},
                  {"rows", rows}};
  if (by_eps) {
    // Strict decrease of the shock-limit error along decreasing epsilon.
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : rows)
      if (row.contains("shock_l1_error") && row["shock_l1_error"].is_number())
        pts.emplace_back(row["epsilon"].get<double>(), row["shock_l1_error"].get<double>());
    std::sort(pts.begin(), pts.end(), [](auto a, auto b) { return a.first > b.first; });
    bool monotone = pts.size() == values.size();
    for (std::size_t i = 1; i < pts.size(); ++i) monotone = monotone && pts[i].second < pts[i - 1].second;
    summary["shock_limit_monotone"] = monotone;
    if (cfg.sweep.simulate) {
      double lo = INFINITY, hi = 0.0;
      for (const auto& row : rows) {
        const double v = cell(row, "x_norm_sup_over_eps3");
        if (std::isfinite(v)) lo = std::min(lo, v), hi = std::max(hi, v);
      }
      summary["x_norm_over_eps3_spread"] = hi > 0.0 ? number(hi / lo) : json(nullptr);
    }
  }
  if (!failures.empty()) summary["failures"] = failures;
  if (cfg.outputs.wants("json")) write_json(dir / "summary.json", summary);
  if (code != 0) {
    std::rethrow_exception(*std::find_if(errors.begin(), errors.end(), [](auto& e) { return bool(e); }));
  }
  return summary;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse:
    case ErrorKind::validation:
    case ErrorKind::invalid_parameters:
    case ErrorKind::admissibility:
      return 2;
    case ErrorKind::io:
      return 4;
    default:
      return 3;
  }
}

int exit_code(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return exit_code(err->kind());
  return 3;
}

json error_json(const std::exception& e) {
  json out;
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    out["error"] = std::string(to_string(err->kind()));
    if (const auto* c = dynamic_cast<const CongestionError*>(&e))
      out["congestion"] = {{"t", c->time()}, {"index", c->index()}, {"xi", c->xi()}, {"v", c->value()}};
  } else {
    out["error"] = "internal-error";
  }
  out["message"] = e.what();
  out["exit_code"] = exit_code(e);
  return out;
}

}  // namespace cw::app
