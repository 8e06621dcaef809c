#include "cw/profile.hpp"

#include <algorithm>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "cw/error.hpp"

namespace cw {

namespace odeint = boost::numeric::odeint;

namespace {

using OdeState = std::array<double, 1>;

struct Target {
  double tau;
  std::size_t index;
};

// Integrates from v(tau = 0) = v0 in the direction given by `sign` (tau = sign * (xi - anchor)),
// writing dense-output samples at the targets (sorted by tau ascending).
void integrate_half(const ModelParams& p, double sign, const std::vector<Target>& targets, Field& out,
                    const ProfileOptions& opt) {
  const double v0 = 0.5 * (1.0 + p.v_plus());
  const double vp = p.v_plus();
  const auto c = envelope_constants(p);
  const double eps = p.epsilon();
  const double rate_length = eps / c.a3;
  const double stop_gap = 1e-12 * (vp - 1.0);

  auto sys = [&p, sign](const OdeState& x, OdeState& dxdt, double) {
    dxdt[0] = sign * profile_derivative_at(std::clamp(x[0], 1.0 + 1e-300, p.v_plus()), 1, p);
  };

  std::size_t j = 0;
  while (j < targets.size() && targets[j].tau <= 0.0) out[targets[j++].index] = v0;
  if (j == targets.size()) return;

  auto stepper = odeint::make_dense_output(opt.abs_tol, opt.rel_tol, rate_length / 16.0,
                                           odeint::runge_kutta_dopri5<OdeState>());
  stepper.initialize(OdeState{v0}, 0.0, 1e-3 * rate_length);
  std::size_t steps = 0;
  while (j < targets.size()) {
    const auto [t0, t1] = stepper.do_step(sys);
    if (++steps > 10'000'000 || !(t1 > t0))
      throw Error(ErrorKind::solver_failure, "solve_profile: adaptive step size underflow near tau = " +
                                                 std::to_string(t0));
    while (j < targets.size() && targets[j].tau <= t1) {
      OdeState y;
      stepper.calc_state(targets[j].tau, y);
      out[targets[j++].index] = y[0];
    }
    const double vc = stepper.current_state()[0];
    if (!std::isfinite(vc))
      throw Error(ErrorKind::solver_failure, "solve_profile: non-finite state at tau = " + std::to_string(t1));
    const bool forward = sign > 0.0;
    const double gap = forward ? vp - vc : vc - 1.0;
    if (gap < stop_gap) {
      // Analytic asymptotes of the linearized (free side) or algebraic (congested side) tail.
      for (; j < targets.size(); ++j) {
        const double d = targets[j].tau - t1;
        double v;
        if (forward) {
          v = vp - gap * std::exp(-c.a3 * d / eps);
        } else {
          const double g = p.gamma();
          v = 1.0 + std::pow(std::pow(gap, -g) + p.s() * (vp - 1.0) * d / eps, -1.0 / g);
        }
        out[targets[j].index] = v;
      }
      break;
    }
  }
}

}  // namespace

Profile::Profile(ModelParams params, Grid grid, Field v_eps, double anchor_xi)
    : params_(params), grid_(grid), v_(std::move(v_eps)), anchor_xi_(anchor_xi) {
  if (v_.size() != grid_.n()) throw Error(ErrorKind::size_mismatch, "Profile: samples do not match grid");
  const double s = params_.s();
  const double vp = params_.v_plus();
  u_.resize(v_.size());
  w_.resize(v_.size());
  for (std::size_t i = 0; i < v_.size(); ++i) {
    if (!(v_[i] > 1.0)) throw Error(ErrorKind::domain, "Profile: v_eps must exceed 1 at node " + std::to_string(i));
    u_[i] = s * vp + params_.u_plus() - s * v_[i];
    w_[i] = u_[i] - phi(v_[i], params_) * profile_derivative_at(v_[i], 1, params_);
  }
}

double profile_derivative_at(double v, int k, const ModelParams& p) {
  const double c = p.s() / (p.epsilon() * p.gamma());
  const double m = p.gamma() + 1.0;
  const double vp = p.v_plus();
  const double d = v - 1.0;
  const double q = (vp - v) * v;
  const double q1 = vp - 2.0 * v;
  const double dm2 = (m == 2.0) ? 1.0 : std::pow(d, m - 2.0);
  const double pm = dm2 * d * d;
  const double pm1 = m * dm2 * d;
  const double r = c * q * pm;
  if (k == 1) return r;
  const double r1 = c * (q1 * pm + q * pm1);
  if (k == 2) return r1 * r;
  if (k == 3) {
    const double pm2 = m * (m - 1.0) * dm2;
    const double r2 = c * (-2.0 * pm + 2.0 * q1 * pm1 + q * pm2);
    return (r2 * r + r1 * r1) * r;
  }
  throw Error(ErrorKind::unsupported_order, "profile_derivative: order " + std::to_string(k) + " not in {1, 2, 3}");
}

Field sample_profile(const ModelParams& p, std::span<const double> xi, const ProfileOptions& opt) {
  std::vector<Target> fwd, bwd;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    const double d = xi[i] - opt.anchor_xi;
    if (d >= 0.0)
      fwd.push_back({d, i});
    else
      bwd.push_back({-d, i});
  }
  auto by_tau = [](const Target& a, const Target& b) { return a.tau < b.tau; };
  std::sort(fwd.begin(), fwd.end(), by_tau);
  std::sort(bwd.begin(), bwd.end(), by_tau);
  Field out(xi.size(), 0.0);
  integrate_half(p, 1.0, fwd, out, opt);
  integrate_half(p, -1.0, bwd, out, opt);
  return out;
}

Profile solve_profile(const ModelParams& p, const Grid& grid, const ProfileOptions& opt) {
  const double scale = p.epsilon() * p.gamma() / (p.s() * p.v_plus() * std::pow(p.v_plus() - 1.0, p.gamma() + 1.0));
  if (!(scale > grid.dx() / 10.0))
    throw Error(ErrorKind::resolution, "solve_profile: grid spacing " + std::to_string(grid.dx()) +
                                           " too coarse for transition length " + std::to_string(scale));
  const Field xs = grid.nodes();
  Field v = sample_profile(p, xs, opt);
  return Profile(p, grid, std::move(v), opt.anchor_xi);
}

Field profile_derivative(const Profile& profile, int k) {
  if (k < 1 || k > 3)
    throw Error(ErrorKind::unsupported_order, "profile_derivative: order " + std::to_string(k) + " not in {1, 2, 3}");
  const Field& v = profile.v_eps();
  Field out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = profile_derivative_at(v[i], k, profile.params());
  return out;
}

const char* to_string(Region r) {
  switch (r) {
    case Region::congested: return "congested";
    case Region::free: return "free";
    case Region::global: return "global";
  }
  return "global";
}

namespace {

std::pair<double, double> congested_bounds(double xi, const ModelParams& p, const EnvelopeConstants& c) {
  const double ig = -1.0 / p.gamma();
  return {1.0 + std::pow(c.b - c.a0 * xi / p.epsilon(), ig), 1.0 + std::pow(c.b - c.a1 * xi / p.epsilon(), ig)};
}

std::pair<double, double> free_bounds(double xi, const ModelParams& p, const EnvelopeConstants& c) {
  const double h = 0.5 * (p.v_plus() - 1.0);
  return {p.v_plus() - h * std::exp(-c.a2 * xi / p.epsilon()), p.v_plus() - h * std::exp(-c.a3 * xi / p.epsilon())};
}

}  // namespace

std::pair<double, double> envelope_bounds(double xi, const ModelParams& p, const EnvelopeConstants& c) {
  return xi < 0.0 ? congested_bounds(xi, p, c) : free_bounds(xi, p, c);
}

double global_upper_bound(double xi, const ModelParams& p, const EnvelopeConstants& c) {
  if (xi < 0.0) return 1.0 + std::pow(c.b - c.a1 * xi / p.epsilon(), -1.0 / p.gamma());
  return p.v_plus();
}

EnvelopeCheck verify_envelopes(const Profile& profile, const EnvelopeConstants& c, double tol) {
  const auto& p = profile.params();
  const auto& g = profile.grid();
  const auto& v = profile.v_eps();
  constexpr double lowest = -std::numeric_limits<double>::infinity();
  EnvelopeCheck out;
  out.regions[0].region = Region::congested;
  out.regions[1].region = Region::free;
  out.regions[2].region = Region::global;
  for (auto& r : out.regions) r.max_lower_violation = r.max_upper_violation = lowest;

  auto record = [&](BoundReport& r, double lower, double upper, double value) {
    r.max_lower_violation = std::max(r.max_lower_violation, lower - value);
    r.max_upper_violation = std::max(r.max_upper_violation, value - upper);
  };

  for (std::size_t i = 0; i < g.n(); ++i) {
    const double xi = g.x(i) - profile.anchor_xi();
    if (xi <= 0.0) {
      const auto [lo, hi] = congested_bounds(xi, p, c);
      record(out.regions[0], lo, hi, v[i]);
    }
    if (xi >= 0.0) {
      const auto [lo, hi] = free_bounds(xi, p, c);
      record(out.regions[1], lo, hi, v[i]);
    }
    record(out.regions[2], 1.0, global_upper_bound(xi, p, c), v[i]);
  }
  for (auto& r : out.regions) {
    if (r.max_lower_violation == lowest) r.max_lower_violation = 0.0;
    if (r.max_upper_violation == lowest) r.max_upper_violation = 0.0;
    r.pass = r.max_lower_violation <= tol && r.max_upper_violation <= tol;
  }
  return out;
}

std::vector<ShockLimitPoint> shock_limit_error(const ModelParams& base, std::span<const double> epsilons,
                                               double half_width, std::size_t n) {
  std::vector<ShockLimitPoint> out;
  const Grid grid(-half_width, half_width, n);
  for (double eps : epsilons) {
    const ModelParams p = base.with_epsilon(eps);
    const Profile prof = solve_profile(p, grid);
    Field err(grid.n());
    for (std::size_t i = 0; i < grid.n(); ++i) {
      const double xi = grid.x(i);
      const double shock = xi < 0.0 ? 1.0 : (xi > 0.0 ? p.v_plus() : 0.5 * (1.0 + p.v_plus()));
      err[i] = std::abs(prof.v_eps()[i] - shock);
    }
    out.push_back({eps, trapz(err, grid)});
  }
  return out;
}

}  // namespace cw
