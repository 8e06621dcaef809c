#include <algorithm>
#include <cmath>
#include <string>

#include "cw/error.hpp"
#include "cw/state.hpp"

namespace cw {

namespace {

double bump(double x) { return std::abs(x) < 1.0 ? std::exp(-1.0 / (1.0 - x * x)) : 0.0; }

double bump_slope(double x) {
  if (std::abs(x) >= 1.0) return 0.0;
  const double q = 1.0 - x * x;
  return bump(x) * (-2.0 * x / (q * q));
}

double bump_slope_max() {
  static const double value = [] {
    double m = 0.0;
    double at = 0.0;
    for (int i = 0; i <= 20000; ++i) {
      const double x = i / 20000.0;
      if (std::abs(bump_slope(x)) > m) {
        m = std::abs(bump_slope(x));
        at = x;
      }
    }
    // Golden-section polish around the sampled maximum.
    double a = std::max(0.0, at - 1e-4), b = std::min(1.0, at + 1e-4);
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 60; ++it) {
      const double c = b - r * (b - a), d = a + r * (b - a);
      if (std::abs(bump_slope(c)) > std::abs(bump_slope(d)))
        b = d;
      else
        a = c;
    }
    return std::abs(bump_slope(0.5 * (a + b)));
  }();
  return value;
}

}  // namespace

const char* to_string(PerturbationShape s) {
  switch (s) {
    case PerturbationShape::gaussian_dipole: return "gaussian-dipole";
    case PerturbationShape::compact_bump_derivative: return "compact-bump-derivative";
    case PerturbationShape::custom_samples: return "custom-samples";
  }
  return "gaussian-dipole";
}

const char* to_string(AppliesTo a) { return a == AppliesTo::v_only ? "v-only" : "v-and-w"; }

Field perturbation_potential(const PerturbationSpec& spec, const Grid& grid) {
  Field pot(grid.n(), 0.0);
  if (spec.shape == PerturbationShape::custom_samples) {
    if (spec.custom_potential.size() != grid.n())
      throw Error(ErrorKind::size_mismatch, "custom perturbation potential has " +
                                                std::to_string(spec.custom_potential.size()) + " samples, grid has " +
                                                std::to_string(grid.n()));
    for (std::size_t i = 0; i < grid.n(); ++i) pot[i] = spec.amplitude * spec.custom_potential[i];
    return pot;
  }
  if (!(spec.width > 0.0)) throw Error(ErrorKind::invalid_parameters, "perturbation width must be positive");
  if (spec.shape == PerturbationShape::gaussian_dipole) {
    const double peak = std::sqrt(2.0) * std::exp(-0.5);
    for (std::size_t i = 0; i < grid.n(); ++i) {
      const double x = (grid.x(i) - spec.center) / spec.width;
      pot[i] = spec.amplitude * spec.width * std::exp(-x * x) / peak;
    }
  } else {
    const double peak = bump_slope_max();
    for (std::size_t i = 0; i < grid.n(); ++i) {
      const double x = (grid.x(i) - spec.center) / spec.width;
      pot[i] = spec.amplitude * spec.width * bump(x) / peak;
    }
  }
  return pot;
}

Field perturbation_samples(const PerturbationSpec& spec, const Grid& grid) {
  return diff1(perturbation_potential(spec, grid), grid);
}

State perturbed_state(const Profile& profile, const PerturbationSpec& spec) {
  const Grid& g = profile.grid();
  State st{0.0, g, profile.v_eps(), profile.w_eps()};
  if (spec.amplitude == 0.0) return st;
  const Field p = perturbation_samples(spec, g);
  for (std::size_t i = 0; i < g.n(); ++i) st.v[i] += p[i];
  if (spec.applies_to == AppliesTo::v_and_w)
    for (std::size_t i = 0; i < g.n(); ++i) st.w[i] += p[i];
  return st;
}

State initial_state(const Profile& profile, const PerturbationSpec& spec) {
  State st = perturbed_state(profile, spec);
  for (std::size_t i = 0; i < st.v.size(); ++i)
    if (!(st.v[i] > 1.0 + 1e-13))
      throw CongestionError("initial perturbation reaches congestion (v <= 1) at xi = " +
                                std::to_string(st.grid.x(i)),
                            0.0, i, st.grid.x(i), st.v[i]);
  return st;
}

}  // namespace cw
