#pragma once

#include <span>
#include <vector>

#include "cw/state.hpp"

namespace cw {

struct DiagnosticWeights {
  double c0 = 1.0;
  double c1 = 1.0;
  double c2 = 1.0;
};

struct IntegratedFields {
  Field V;
  Field W0;
  Field eta;
  double tail_truncation_bound = 0.0;
};

struct EnergyReport {
  double t = 0.0;
  double e0 = 0.0, e1 = 0.0, e2 = 0.0;
  double d0 = 0.0, d1 = 0.0, d2 = 0.0;
  double int_d0 = 0.0, int_d1 = 0.0, int_d2 = 0.0;
  double x_norm_sq = 0.0;
  double sup_v_dev = 0.0, sup_u_dev = 0.0;
  double mass_v = 0.0, mass_u = 0.0;
};

struct Snapshot {
  State state;
  EnergyReport energy;
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
  // First time the perturbation (above 1e-10) came within 10 dx of a boundary; negative if never.
  double contamination_time = -1.0;
  std::size_t steps = 0;
};

IntegratedFields integrated_fields(const State& state, const Profile& profile);
Field eta0(std::span<const double> V0, const Profile& profile);

// Instantaneous energies; int_d* are zero and x_norm_sq is the instantaneous weighted sum.
// with_u = false skips the u reconstruction (sup_u_dev and mass_u left at 0); u is measured against background_u.
EnergyReport energies(const State& state, const Profile& profile, const DiagnosticWeights& c, bool with_u = true);

// Same as energies(), reusing phi(v_eps) and scratch buffers across calls.
class EnergyEvaluator {
public:
  EnergyEvaluator(const Profile& profile, DiagnosticWeights c);
  EnergyReport operator()(const State& state, bool with_u = true);

private:
  const Profile* profile_;
  DiagnosticWeights c_;
  Field phi_e_, u_ref_, dv_, dw_, V_, W_, eta_, dV_, deta_, d2eta_;
};

// Accumulates time integrals of D_k (trapezoid in time) and the running sup of the X-norm sum.
class EnergyLedger {
public:
  EnergyLedger(double epsilon, DiagnosticWeights c) : eps_(epsilon), c_(c) {}
  EnergyReport push(EnergyReport instant);

private:
  double eps_;
  DiagnosticWeights c_;
  bool started_ = false;
  EnergyReport last_{};
  double sup_ = 0.0;
};

// E0 + int D0 + eps^2 (E1 + int D1) + eps^4 (E2 + int D2) with the supplied weights.
double weighted_energy(const EnergyReport& r, double epsilon, const DiagnosticWeights& c);

struct SmallnessResult {
  double lhs = 0.0;
  double threshold = 0.0;
  double margin = 0.0;  // lhs / threshold
  bool pass = true;
};

SmallnessResult smallness_check(const EnergyReport& report0, std::span<const double> W0, const Grid& grid,
                                const ModelParams& p, double T, double delta0, const DiagnosticWeights& c);

// Amplitude for which smallness_check reports the requested margin (the left side is quadratic in it).
double calibrate_amplitude(const Profile& profile, const PerturbationSpec& spec, double T, double delta0,
                           const DiagnosticWeights& c, double target_margin);

// diff1(u - u_ref)/(v_eps - 1) with u_ref = background_u(profile).
Field mu(const State& state, const Profile& profile);

struct DecayRow {
  double t;
  double sup_v_dev;
  double sup_u_dev;
  double e0;
  double x_norm_partial;
};

std::vector<DecayRow> decay_metrics(const Trajectory& trajectory);

}  // namespace cw
