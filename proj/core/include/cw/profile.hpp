#pragma once

#include <array>
#include <span>
#include <utility>
#include <vector>

#include "cw/model.hpp"
#include "cw/numerics.hpp"

namespace cw {

struct ProfileOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  // Position where v = (1 + v_plus)/2 is imposed.
  double anchor_xi = 0.0;
};

class Profile {
public:
  Profile(ModelParams params, Grid grid, Field v_eps, double anchor_xi = 0.0);

  const ModelParams& params() const noexcept { return params_; }
  const Grid& grid() const noexcept { return grid_; }
  const Field& v_eps() const noexcept { return v_; }
  const Field& u_eps() const noexcept { return u_; }
  const Field& w_eps() const noexcept { return w_; }
  double anchor_value() const noexcept { return 0.5 * (1.0 + params_.v_plus()); }
  double anchor_xi() const noexcept { return anchor_xi_; }

private:
  ModelParams params_;
  Grid grid_;
  Field v_;
  Field u_;
  Field w_;
  double anchor_xi_;
};

// Right-hand side of the profile ODE v' = s (v+ - v) v (v-1)^(gamma+1) / (eps gamma)
// and its chain-rule derivatives: k = 1, 2, 3 gives v', v'', v''' as functions of v.
double profile_derivative_at(double v, int k, const ModelParams& p);

Profile solve_profile(const ModelParams& p, const Grid& grid, const ProfileOptions& opt = {});

// Dense-output samples of v at arbitrary (not necessarily sorted) positions.
Field sample_profile(const ModelParams& p, std::span<const double> xi, const ProfileOptions& opt = {});

Field profile_derivative(const Profile& profile, int k);

enum class Region { congested, free, global };
const char* to_string(Region r);

struct BoundReport {
  double max_lower_violation = 0.0;
  double max_upper_violation = 0.0;
  Region region = Region::global;
  bool pass = true;
};

struct EnvelopeCheck {
  std::array<BoundReport, 3> regions;
  bool pass() const { return regions[0].pass && regions[1].pass && regions[2].pass; }
};

// Region-appropriate (lower, upper) envelope at xi; at xi = 0 both sides coincide.
std::pair<double, double> envelope_bounds(double xi, const ModelParams& p, const EnvelopeConstants& c);
double global_upper_bound(double xi, const ModelParams& p, const EnvelopeConstants& c);

EnvelopeCheck verify_envelopes(const Profile& profile, const EnvelopeConstants& c, double tol);

struct ShockLimitPoint {
  double epsilon;
  double l1_error;
};

// L1([-L, L]) distance to the shock 1_{xi<0} + v_plus 1_{xi>0}, one profile of n nodes per epsilon.
std::vector<ShockLimitPoint> shock_limit_error(const ModelParams& base, std::span<const double> epsilons,
                                               double half_width, std::size_t n = 4001);

}  // namespace cw
