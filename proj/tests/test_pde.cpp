#include <doctest.h>

#include <cmath>

#include "cw/error.hpp"
#include "cw/pde.hpp"

using namespace cw;

namespace {

const ModelParams base = ModelParams::defaults();

PerturbationSpec dipole(double amplitude, double center = 1.0, AppliesTo to = AppliesTo::v_only) {
  PerturbationSpec s;
  s.amplitude = amplitude;
  s.center = center;
  s.applies_to = to;
  return s;
}

// Boundary flux of psi through the left end; the right end is pinned.
double psi_jump(const State& st, const Profile& prof) {
  const auto& p = prof.params();
  const std::size_t n = st.v.size() - 1;
  return (psi(st.v[n], p) - psi(prof.v_eps()[n], p)) - (psi(st.v[0], p) - psi(prof.v_eps()[0], p));
}

double u_mass(const State& st, const Profile& prof) {
  const Field u = reconstruct_u(st, prof);
  Field d(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) d[i] = u[i] - prof.u_eps()[i];
  return trapz(d, prof.grid());
}

double v_mass(const State& st, const Profile& prof) {
  Field d(st.v.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = st.v[i] - prof.v_eps()[i];
  return trapz(d, prof.grid());
}

}  // namespace

TEST_CASE("initial state") {
  const Profile prof = solve_profile(base, Grid(-10.0, 20.0, 6001));
  const State zero = initial_state(prof, dipole(0.0));
  CHECK(zero.v == prof.v_eps());
  CHECK(zero.w == prof.w_eps());

  for (auto shape : {PerturbationShape::gaussian_dipole, PerturbationShape::compact_bump_derivative}) {
    PerturbationSpec s = dipole(0.01);
    s.shape = shape;
    const Field p = perturbation_samples(s, prof.grid());
    CHECK(std::abs(trapz(p, prof.grid())) < 1e-12 * s.amplitude);
    CHECK(max_abs(p) == doctest::Approx(s.amplitude).epsilon(1e-3));
  }

  const State both = initial_state(prof, dipole(0.01, 1.0, AppliesTo::v_and_w));
  for (std::size_t i = 0; i < both.v.size(); ++i)
    CHECK(both.w[i] - prof.w_eps()[i] == doctest::Approx(both.v[i] - prof.v_eps()[i]).epsilon(1e-12));

  const double xc = -3.0;
  const double a = 2.0 * (prof.v_eps()[prof.grid().nearest(xc)] - 1.0);
  try {
    initial_state(prof, dipole(a, xc));
    FAIL("expected congestion");
  } catch (const CongestionError& e) {
    CHECK(e.kind() == ErrorKind::congestion);
    CHECK(std::abs(e.xi() - xc) < 1.0);
    CHECK(e.value() <= 1.0 + 1e-13);
  }
}

TEST_CASE("unperturbed profile is steady to second order") {
  auto drift = [](std::size_t n) {
    const Profile prof = solve_profile(base, Grid(-5.0, 5.0, n));
    RunOptions opt;
    opt.t_end = 1.0;
    opt.snapshot_stride = 1000000;
    const Trajectory tr = run(initial_state(prof, dipole(0.0)), prof, opt);
    return tr.snapshots.back().energy.sup_v_dev;
  };
  const double d1 = drift(1001), d2 = drift(2001);
  CHECK(d1 < 1e-3);
  CHECK(d1 / d2 > 3.5);
  CHECK(d1 / d2 < 4.5);
}

TEST_CASE("constant state is unchanged away from the boundaries") {
  const Grid g(-2.0, 2.0, 401);
  const double c = 1.5;
  const Profile flat(base, g, Field(g.n(), c));
  State st{0.0, g, Field(g.n(), c), Field(g.n(), 0.3)};
  const State next = step(st, 1e-3, flat);
  CHECK(next.t == 1e-3);
  double interior = 0.0;
  for (std::size_t i = 60; i + 60 < g.n(); ++i) interior = std::max(interior, std::abs(next.v[i] - c));
  CHECK(interior < 1e-12);
  for (double w : next.w) CHECK(w == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("step halving shows first order in time") {
  const Profile prof = solve_profile(base, Grid(-5.0, 5.0, 2001));
  const State st = initial_state(prof, dipole(0.01));
  auto gap = [&](double dt) {
    const State one = step(st, dt, prof);
    Stepper half(prof, st);
    State two = st;
    half.advance(two, 0.5 * dt);
    half.advance(two, 0.5 * dt);
    return max_abs_diff(one.v, two.v);
  };
  const double g1 = gap(4e-3), g2 = gap(2e-3), g3 = gap(1e-3);
  CHECK(g1 > 0.0);
  CHECK(g1 / g2 == doctest::Approx(4.0).epsilon(0.15));
  CHECK(g2 / g3 == doctest::Approx(4.0).epsilon(0.15));
  CHECK_THROWS_AS(step(st, 0.0, prof), Error);
}

TEST_CASE("w is transported exactly") {
  const Grid g(-5.0, 5.0, 1001);
  const Profile prof = solve_profile(base, g);
  const State st = initial_state(prof, dipole(0.01, 1.0, AppliesTo::v_and_w));
  Stepper stepper(prof, st);
  // s = 1 and dt = dx: one node per step.
  const Field w = stepper.transported_w(g.dx() * 7);
  for (std::size_t i = 0; i + 7 < g.n(); ++i) CHECK(std::abs(w[i] - st.w[i + 7]) < 1e-15);
  // Cubic interpolation at a half-node shift matches the analytic shift to O(dx^4).
  const double t = 0.5 * g.dx();
  const Field wh = stepper.transported_w(t);
  PerturbationSpec shifted = dipole(0.01, 1.0 - t, AppliesTo::v_and_w);
  const Field exact = perturbation_samples(shifted, g);
  double worst = 0.0;
  for (std::size_t i = 2; i + 3 < g.n(); ++i) worst = std::max(worst, std::abs(wh[i] - prof.w_eps()[i] - exact[i]));
  CHECK(worst < 1e-6);
}

TEST_CASE("run bookkeeping") {
  const Profile prof = solve_profile(base, Grid(-5.0, 5.0, 1001));
  const State st = initial_state(prof, dipole(0.005));
  RunOptions opt;
  opt.t_end = 0.0;
  int calls = 0;
  const std::array<Observer, 1> obs{[&](const Snapshot&) { ++calls; }};
  const Trajectory none = run(st, prof, opt, obs);
  CHECK(none.snapshots.size() == 1);
  CHECK(calls == 1);
  CHECK(none.steps == 0);

  opt.t_end = 0.1;
  opt.dt = 0.01;
  opt.snapshot_stride = 3;
  opt.keep_states = false;
  calls = 0;
  const Trajectory tr = run(st, prof, opt, obs);
  CHECK(tr.steps == 10);
  CHECK(tr.snapshots.size() == 5);  // t = 0, 0.03, 0.06, 0.09, 0.1
  CHECK(calls == 5);
  CHECK(tr.snapshots.back().energy.t == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(tr.snapshots.back().state.v.empty());
  opt.t_end = -1.0;
  CHECK_THROWS_AS(run(st, prof, opt), Error);
}

TEST_CASE("conservation over a short run") {
  const Profile prof = solve_profile(base, Grid(-10.0, 20.0, 3001));
  for (auto to : {AppliesTo::v_only, AppliesTo::v_and_w}) {
    const State st0 = initial_state(prof, dipole(0.005, 1.0, to));
    const double mv0 = v_mass(st0, prof);
    const double mu0 = u_mass(st0, prof) - psi_jump(st0, prof);
    CHECK(std::abs(mv0) < 1e-12);
    Stepper stepper(prof, st0);
    State st = st0;
    double worst_v = 0.0, worst_u = 0.0;
    for (int k = 0; k < 500; ++k) {
      stepper.advance(st, 2e-3);
      if (k % 25 != 24) continue;
      worst_v = std::max(worst_v, std::abs(v_mass(st, prof) - mv0));
      worst_u = std::max(worst_u, std::abs(u_mass(st, prof) - psi_jump(st, prof) - mu0));
    }
    CHECK(worst_v < 1e-8);
    // The u-integral is conserved once the psi flux through the left end is accounted for.
    CHECK(worst_u < 1e-10);
  }
}

TEST_CASE("congestion aborts the step") {
  const Profile prof = solve_profile(base, Grid(-10.0, 20.0, 3001));
  const double a = 3.0 * (prof.v_eps()[prof.grid().nearest(-3.0)] - 1.0);
  const State bad = perturbed_state(prof, dipole(a, -3.0));
  try {
    step(bad, 1e-4, prof);
    FAIL("expected congestion");
  } catch (const CongestionError& e) {
    CHECK(e.time() == doctest::Approx(1e-4));
    CHECK(e.value() <= 1.0 + 1e-13);
  }
  CHECK_THROWS_AS(reconstruct_u(bad, prof), CongestionError);
}

TEST_CASE("energy dissipation with W0 = 0") {
  const Profile prof = solve_profile(base, Grid(-10.0, 20.0, 6001));
  const DiagnosticWeights c{};
  const double a = calibrate_amplitude(prof, dipole(1.0), 2.0, 0.01, c, 0.5);
  RunOptions opt;
  opt.t_end = 2.0;
  opt.snapshot_stride = 100;
  const Trajectory tr = run(initial_state(prof, dipole(a)), prof, opt);
  const double e00 = tr.snapshots.front().energy.e0;
  REQUIRE(e00 > 0.0);
  double worst = 0.0;
  for (const auto& s : tr.snapshots) worst = std::max(worst, (s.energy.e0 + 2.0 * s.energy.int_d0) / e00);
  CHECK(worst <= 1.0 + 1e-3);
  CHECK(tr.snapshots.back().energy.e0 < e00);
  // X-norm ledger entry is a running maximum.
  for (std::size_t k = 1; k < tr.snapshots.size(); ++k)
    CHECK(tr.snapshots[k].energy.x_norm_sq >= tr.snapshots[k - 1].energy.x_norm_sq);
}

TEST_CASE("reconstructed u") {
  auto err = [](std::size_t n) {
    const Profile prof = solve_profile(base, Grid(-5.0, 5.0, n));
    const State st = initial_state(prof, dipole(0.0));
    const Field u = reconstruct_u(st, prof);
    CHECK(std::abs(u.back() - base.u_plus()) < 1e-10);
    return max_abs_diff(u, prof.u_eps());
  };
  const double e1 = err(1001), e2 = err(2001);
  CHECK(e1 < 1e-3);
  CHECK(e1 / e2 > 3.5);
}

TEST_CASE("default dt") {
  CHECK(default_dt(Grid(-10.0, 20.0, 6001), base) == doctest::Approx(1e-3));
  CHECK(default_dt(Grid(-10.0, 20.0, 601), base.with_epsilon(10.0)) == doctest::Approx(0.025));
}
