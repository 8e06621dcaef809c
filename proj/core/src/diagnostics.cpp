#include "cw/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "cw/error.hpp"

namespace cw {

namespace {

Field difference(std::span<const double> a, std::span<const double> b) {
  Field d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

double trapz_weighted_square(std::span<const double> weight, std::span<const double> f, const Grid& g) {
  const std::size_t n = f.size();
  double s = 0.5 * (weight[0] * f[0] * f[0] + weight[n - 1] * f[n - 1] * f[n - 1]);
  for (std::size_t i = 1; i + 1 < n; ++i) s += weight[i] * f[i] * f[i];
  return s * g.dx();
}

double trapz_of_square(std::span<const double> f, const Grid& g) {
  const std::size_t n = f.size();
  double s = 0.5 * (f[0] * f[0] + f[n - 1] * f[n - 1]);
  for (std::size_t i = 1; i + 1 < n; ++i) s += f[i] * f[i];
  return s * g.dx();
}

// Trapezoid of xi * f^2 over the nodes with xi > 0.
double half_line_weighted(std::span<const double> f, const Grid& g) {
  double s = 0.0;
  bool first = true;
  double prev = 0.0;
  for (std::size_t i = 0; i < g.n(); ++i) {
    const double xi = g.x(i);
    if (!(xi > 0.0)) continue;
    const double val = xi * f[i] * f[i];
    if (!first) s += 0.5 * g.dx() * (prev + val);
    prev = val;
    first = false;
  }
  return s;
}

Field phi_of_profile(const Profile& profile) {
  const auto& v = profile.v_eps();
  Field out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = phi(v[i], profile.params());
  return out;
}

}  // namespace

IntegratedFields integrated_fields(const State& state, const Profile& profile) {
  const Grid& g = profile.grid();
  if (state.v.size() != g.n() || state.w.size() != g.n())
    throw Error(ErrorKind::size_mismatch, "integrated_fields: state does not match profile grid");
  const auto& ve = profile.v_eps();
  IntegratedFields out;
  const Field dv = difference(state.v, ve);
  const Field dw = difference(state.w, profile.w_eps());
  out.V = cumtrapz(dv, g);
  out.W0 = cumtrapz(dw, g);
  out.eta = eta0(out.V, profile);
  const double slope = profile_derivative_at(ve[0], 1, profile.params());
  const double length = slope > 0.0 ? (ve[0] - 1.0) / slope : 0.0;
  out.tail_truncation_bound = (std::abs(dv[0]) + std::abs(dw[0])) * length;
  return out;
}

Field eta0(std::span<const double> V0, const Profile& profile) {
  Field eta = diff1(V0, profile.grid());
  const auto& ve = profile.v_eps();
  for (std::size_t i = 0; i < eta.size(); ++i) eta[i] /= (ve[i] - 1.0);
  return eta;
}

EnergyReport energies(const State& state, const Profile& profile, const DiagnosticWeights& c, bool with_u) {
  return EnergyEvaluator(profile, c)(state, with_u);
}

EnergyEvaluator::EnergyEvaluator(const Profile& profile, DiagnosticWeights c)
    : profile_(&profile), c_(c), phi_e_(phi_of_profile(profile)), u_ref_(background_u(profile)) {}

EnergyReport EnergyEvaluator::operator()(const State& state, bool with_u) {
  const Profile& profile = *profile_;
  const Grid& g = profile.grid();
  const std::size_t n = g.n();
  if (state.v.size() != n || state.w.size() != n)
    throw Error(ErrorKind::size_mismatch, "energies: state does not match profile grid");
  const double eps = profile.params().epsilon();
  const auto& ve = profile.v_eps();
  const auto& we = profile.w_eps();
  dv_.resize(n);
  dw_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    dv_[i] = state.v[i] - ve[i];
    dw_[i] = state.w[i] - we[i];
  }
  V_ = cumtrapz(dv_, g);
  eta_ = diff1(V_, g);
  for (std::size_t i = 0; i < n; ++i) eta_[i] /= (ve[i] - 1.0);
  dV_ = diff1(V_, g);
  deta_ = diff1(eta_, g);
  d2eta_ = diff1(deta_, g);

  EnergyReport r;
  r.t = state.t;
  r.e0 = trapz_of_square(V_, g);
  r.d0 = trapz_weighted_square(phi_e_, dV_, g);
  r.e1 = trapz_of_square(eta_, g);
  r.d1 = trapz_weighted_square(phi_e_, deta_, g);
  r.e2 = trapz_of_square(deta_, g);
  r.d2 = trapz_weighted_square(phi_e_, d2eta_, g);
  r.x_norm_sq = c_.c0 * r.e0 + c_.c1 * eps * eps * r.e1 + c_.c2 * std::pow(eps, 4) * r.e2;
  r.sup_v_dev = max_abs(dv_);
  r.mass_v = trapz(dv_, g);
  if (with_u) {
    const Field du = difference(reconstruct_u(state, profile), u_ref_);
    r.sup_u_dev = max_abs(du);
    r.mass_u = trapz(du, g);
  }
  return r;
}

EnergyReport EnergyLedger::push(EnergyReport r) {
  if (started_) {
    const double h = r.t - last_.t;
    r.int_d0 = last_.int_d0 + 0.5 * h * (last_.d0 + r.d0);
    r.int_d1 = last_.int_d1 + 0.5 * h * (last_.d1 + r.d1);
    r.int_d2 = last_.int_d2 + 0.5 * h * (last_.d2 + r.d2);
  } else {
    r.int_d0 = r.int_d1 = r.int_d2 = 0.0;
  }
  const double e2 = eps_ * eps_;
  const double sum = c_.c0 * (r.e0 + r.int_d0) + c_.c1 * e2 * (r.e1 + r.int_d1) + c_.c2 * e2 * e2 * (r.e2 + r.int_d2);
  sup_ = started_ ? std::max(sup_, sum) : sum;
  r.x_norm_sq = sup_;
  started_ = true;
  last_ = r;
  return r;
}

double weighted_energy(const EnergyReport& r, double epsilon, const DiagnosticWeights& c) {
  const double e2 = epsilon * epsilon;
  return c.c0 * (r.e0 + r.int_d0) + c.c1 * e2 * (r.e1 + r.int_d1) + c.c2 * e2 * e2 * (r.e2 + r.int_d2);
}

SmallnessResult smallness_check(const EnergyReport& r0, std::span<const double> W0, const Grid& grid,
                                const ModelParams& p, double T, double delta0, const DiagnosticWeights& c) {
  if (W0.size() != grid.n()) throw Error(ErrorKind::size_mismatch, "smallness_check: W0 does not match grid");
  const double eps = p.epsilon();
  const Field d1 = diff1(W0, grid);
  const Field d2 = diff2(W0, grid);
  const std::array<double, 3> ck{c.c0, c.c1, c.c2};
  const std::array<double, 3> ek{r0.e0, r0.e1, r0.e2};
  const std::array<double, 3> weighted{half_line_weighted(W0, grid), half_line_weighted(d1, grid),
                                       half_line_weighted(d2, grid)};
  double lhs = 0.0;
  for (int k = 0; k < 3; ++k) lhs += ck[k] * std::pow(eps, 2 * k) * ek[k] + std::pow(eps, 2 * k - 1) * weighted[k];
  lhs += trapz_of_square(W0, grid);
  const double w_part = eps * eps * trapz_of_square(d1, grid) + std::pow(eps, 4) * trapz_of_square(d2, grid);
  if (w_part > 0.0) lhs += std::pow(T / eps, 1.0 / p.gamma()) * w_part;

  SmallnessResult out;
  out.lhs = lhs;
  out.threshold = delta0 * eps * eps * eps;
  out.margin = lhs / out.threshold;
  out.pass = lhs <= out.threshold;
  return out;
}

double calibrate_amplitude(const Profile& profile, const PerturbationSpec& spec, double T, double delta0,
                           const DiagnosticWeights& c, double target_margin) {
  PerturbationSpec probe = spec;
  probe.amplitude = 1e-6;
  const State st = perturbed_state(profile, probe);
  const EnergyReport r0 = energies(st, profile, c, false);
  const IntegratedFields f = integrated_fields(st, profile);
  const SmallnessResult sm = smallness_check(r0, f.W0, profile.grid(), profile.params(), T, delta0, c);
  if (!(sm.lhs > 0.0) || !std::isfinite(sm.lhs))
    throw Error(ErrorKind::invalid_parameters, "calibrate_amplitude: perturbation has no measurable size");
  return probe.amplitude * std::sqrt(target_margin / sm.margin);
}

Field mu(const State& state, const Profile& profile) {
  const Field du = difference(reconstruct_u(state, profile), background_u(profile));
  Field out = diff1(du, profile.grid());
  const auto& ve = profile.v_eps();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= (ve[i] - 1.0);
  return out;
}

std::vector<DecayRow> decay_metrics(const Trajectory& trajectory) {
  std::vector<DecayRow> rows;
  rows.reserve(trajectory.snapshots.size());
  for (const auto& s : trajectory.snapshots)
    rows.push_back({s.energy.t, s.energy.sup_v_dev, s.energy.sup_u_dev, s.energy.e0, s.energy.x_norm_sq});
  return rows;
}

}  // namespace cw
