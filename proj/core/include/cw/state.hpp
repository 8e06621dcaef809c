#pragma once

#include "cw/numerics.hpp"
#include "cw/profile.hpp"

namespace cw {

// Wave-frame fields; u is reconstructed on demand.
struct State {
  double t = 0.0;
  Grid grid;
  Field v;
  Field w;
};

enum class PerturbationShape { gaussian_dipole, compact_bump_derivative, custom_samples };
enum class AppliesTo { v_only, v_and_w };

const char* to_string(PerturbationShape s);
const char* to_string(AppliesTo a);

// The perturbation is diff1 of a potential, so its grid integral vanishes up to the potential's
// boundary values. amplitude is the peak of the continuous perturbation for the built-in shapes;
// for custom_samples the supplied potential is multiplied by amplitude.
struct PerturbationSpec {
  PerturbationShape shape = PerturbationShape::gaussian_dipole;
  double amplitude = 0.0;
  double center = 1.0;
  double width = 0.3;
  AppliesTo applies_to = AppliesTo::v_only;
  Field custom_potential;
};

Field perturbation_potential(const PerturbationSpec& spec, const Grid& grid);
Field perturbation_samples(const PerturbationSpec& spec, const Grid& grid);

// Builds v = v_eps + p (and w = w_eps + p for v_and_w) without checking congestion.
State perturbed_state(const Profile& profile, const PerturbationSpec& spec);
// Same, throwing CongestionError if v <= 1 + 1e-13 anywhere.
State initial_state(const Profile& profile, const PerturbationSpec& spec);

// u = w + phi(v) dv/dxi, with the flux evaluated exactly as in the time stepper.
Field reconstruct_u(const State& state, const Profile& profile);
// reconstruct_u applied to the unperturbed profile: the discrete background that u is compared with.
Field background_u(const Profile& profile);

}  // namespace cw
