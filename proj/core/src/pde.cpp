#include "cw/pde.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cw/error.hpp"

namespace cw {

namespace {

void scheme_faces(std::span<const double> v, const ModelParams& p, Field& a) {
  a.resize(v.size() - 1);
  for (std::size_t i = 0; i + 1 < v.size(); ++i) a[i] = phi_face_mean(v[i], v[i + 1], p);
}

// r = discrete d/dxi of the total flux G = s v + w + a dv/dxi, with the background flux at the
// left end (half cell) and a pinned right end.
void scheme_residual(std::span<const double> v, std::span<const double> w, std::span<const double> a,
                     const ModelParams& p, double dx, Field& r) {
  const std::size_t n = v.size();
  const double s = p.s();
  r.resize(n);
  double g_left = s * p.v_plus() + w[0];
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double g = 0.5 * s * (v[i] + v[i + 1]) + 0.5 * (w[i] + w[i + 1]) + a[i] * (v[i + 1] - v[i]) / dx;
    r[i] = (i == 0 ? 2.0 : 1.0) * (g - g_left) / dx;
    g_left = g;
  }
  r[n - 1] = 0.0;
}

void check_uncongested(std::span<const double> v, const Grid& g, double t) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!(v[i] > 1.0 + 1e-13))
      throw CongestionError("congestion (v <= 1 + 1e-13) at t = " + std::to_string(t) +
                                ", xi = " + std::to_string(g.x(i)) + ", v = " + std::to_string(v[i]),
                            t, i, g.x(i), v[i]);
}

}  // namespace

Stepper::Stepper(const Profile& profile, const State& origin, StepOptions opt)
    : profile_(profile), opt_(opt), w0_(origin.w), t0_(origin.t) {
  if (!(origin.grid == profile.grid())) throw Error(ErrorKind::size_mismatch, "Stepper: state and profile grids differ");
}

Field Stepper::transported_w(double t) const {
  const Grid& g = profile_.grid();
  const std::size_t n = g.n();
  const double shift = profile_.params().s() * (t - t0_) / g.dx();
  Field w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double q = static_cast<double>(i) + shift;
    if (q >= static_cast<double>(n - 1)) {
      w[i] = w0_[n - 1];
      continue;
    }
    const double jf = std::floor(q);
    const auto j = static_cast<std::size_t>(jf);
    if (q == jf) {
      w[i] = w0_[j];
      continue;
    }
    const std::size_t base = std::min(j > 0 ? j - 1 : 0, n - 4);
    const double x = q - static_cast<double>(base);
    const double l0 = -(x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0;
    const double l1 = x * (x - 2.0) * (x - 3.0) / 2.0;
    const double l2 = -x * (x - 1.0) * (x - 3.0) / 2.0;
    const double l3 = x * (x - 1.0) * (x - 2.0) / 6.0;
    w[i] = l0 * w0_[base] + l1 * w0_[base + 1] + l2 * w0_[base + 2] + l3 * w0_[base + 3];
  }
  return w;
}

Field Stepper::rate(const State& state) const {
  Field a, r;
  scheme_faces(state.v, profile_.params(), a);
  scheme_residual(state.v, state.w, a, profile_.params(), profile_.grid().dx(), r);
  return r;
}

void Stepper::faces(std::span<const double> v) { scheme_faces(v, profile_.params(), a_); }

void Stepper::residual(std::span<const double> v, std::span<const double> w) {
  scheme_residual(v, w, a_, profile_.params(), profile_.grid().dx(), r_);
}

void Stepper::advance(State& state, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorKind::invalid_parameters, "step: dt must be positive");
  const Grid& g = profile_.grid();
  const std::size_t n = g.n();
  const double dx = g.dx();
  const double s = profile_.params().s();
  const double t_new = state.t + dt;
  Field w_new = transported_w(t_new);

  sub_.assign(n, 0.0);
  diag_.assign(n, 0.0);
  sup_.assign(n, 0.0);
  delta_.assign(n, 0.0);

  auto solve_increment = [&]() {
    residual(state.v, w_new);
    diag_[0] = 1.0 / dt + 2.0 * (-0.5 * s + a_[0] / dx) / dx;
    sup_[0] = -2.0 * (0.5 * s + a_[0] / dx) / dx;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      diag_[i] = 1.0 / dt + (a_[i] + a_[i - 1]) / (dx * dx);
      sup_[i] = -(0.5 * s + a_[i] / dx) / dx;
      sub_[i] = -(a_[i - 1] / dx - 0.5 * s) / dx;
    }
    diag_[n - 1] = 1.0;
    sub_[n - 1] = 0.0;
    thomas_solve(sub_, diag_, sup_, r_, delta_, scratch_);
  };

  faces(state.v);
  solve_increment();
  iterate_.resize(n);
  for (std::size_t i = 0; i < n; ++i) iterate_[i] = state.v[i] + delta_[i];

  for (int sweep = 0; sweep < opt_.picard_sweeps; ++sweep) {
    check_uncongested(iterate_, g, t_new);
    faces(iterate_);
    solve_increment();
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double next = state.v[i] + delta_[i];
      change = std::max(change, std::abs(next - iterate_[i]));
      iterate_[i] = next;
    }
    if (change < opt_.picard_tol) break;
  }

  check_uncongested(iterate_, g, t_new);
  state.v.swap(iterate_);
  state.w = std::move(w_new);
  state.t = t_new;
}

State step(const State& state, double dt, const Profile& profile, StepOptions opt) {
  Stepper stepper(profile, state, opt);
  State next = state;
  stepper.advance(next, dt);
  return next;
}

double default_dt(const Grid& grid, const ModelParams& p) {
  return std::min(grid.dx() / (2.0 * p.s()), 0.01 * p.epsilon());
}

Field reconstruct_u(const State& state, const Profile& profile) {
  const auto& p = profile.params();
  const std::size_t n = state.v.size();
  if (n != profile.grid().n() || state.w.size() != n)
    throw Error(ErrorKind::size_mismatch, "reconstruct_u: state does not match profile grid");
  check_uncongested(state.v, state.grid, state.t);
  const double dx = state.grid.dx();
  Field a;
  scheme_faces(state.v, p, a);
  Field flux(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) flux[i] = a[i] * (state.v[i + 1] - state.v[i]) / dx;
  Field u(n);
  u[0] = state.w[0] + flux[0];
  for (std::size_t i = 1; i + 1 < n; ++i) u[i] = state.w[i] + 0.5 * (flux[i - 1] + flux[i]);
  u[n - 1] = state.w[n - 1] + flux[n - 2];
  return u;
}

Field background_u(const Profile& profile) {
  return reconstruct_u(State{0.0, profile.grid(), profile.v_eps(), profile.w_eps()}, profile);
}

Trajectory run(const State& state0, const Profile& profile, const RunOptions& opt, std::span<const Observer> observers) {
  if (!(opt.t_end >= 0.0)) throw Error(ErrorKind::invalid_parameters, "run: t_end must be non-negative");
  const auto& p = profile.params();
  const Grid& g = profile.grid();
  const double dt = opt.dt > 0.0 ? opt.dt : default_dt(g, p);
  const std::size_t stride = std::max<std::size_t>(1, opt.snapshot_stride);
  const std::size_t n = g.n();
  const std::size_t margin = std::min<std::size_t>(10, n / 2);

  Trajectory traj;
  EnergyLedger ledger(p.epsilon(), opt.weights);
  EnergyEvaluator evaluate(profile, opt.weights);
  State st = state0;
  Stepper stepper(profile, state0, opt.step);

  auto emit = [&](const EnergyReport& rep) {
    Snapshot snap{st, rep};
    for (const auto& obs : observers) obs(snap);
    if (!opt.keep_states) {
      snap.state.v = {};
      snap.state.w = {};
    }
    traj.snapshots.push_back(std::move(snap));
  };
  auto contaminated = [&]() {
    const auto& ve = profile.v_eps();
    const auto& we = profile.w_eps();
    for (std::size_t k = 0; k < margin; ++k) {
      for (std::size_t i : {k, n - 1 - k})
        if (std::abs(st.v[i] - ve[i]) > 1e-10 || std::abs(st.w[i] - we[i]) > 1e-10) return true;
    }
    return false;
  };

  emit(ledger.push(evaluate(st, true)));
  if (contaminated()) traj.contamination_time = st.t;

  const auto nsteps = static_cast<std::size_t>(std::ceil(opt.t_end / dt - 1e-9));
  for (std::size_t k = 1; k <= nsteps; ++k) {
    const double target = state0.t + std::min(static_cast<double>(k) * dt, opt.t_end);
    const double h = target - st.t;
    if (!(h > 0.0)) break;
    try {
      stepper.advance(st, h);
    } catch (const CongestionError&) {
      throw;
    } catch (const Error& e) {
      throw Error(e.kind(), std::string(e.what()) + " (at t = " + std::to_string(st.t) + ")");
    }
    st.t = target;
    ++traj.steps;
    const bool snap = (k % stride == 0) || k == nsteps;
    const EnergyReport rep = ledger.push(evaluate(st, snap));
    if (traj.contamination_time < 0.0 && contaminated()) traj.contamination_time = st.t;
    if (snap) emit(rep);
  }
  return traj;
}

}  // namespace cw
