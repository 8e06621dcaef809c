#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cw/profile.hpp"

namespace cw {

struct WorstPoint {
  double xi = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  std::size_t member = 0;
};

struct AuditReport {
  std::string lemma_id;
  double fitted_constant = 0.0;
  double fitted_refined = 0.0;
  double refinement_ratio = 1.0;
  bool pass = false;
  WorstPoint worst;
};

// Per-node ratio (lhs / rhs-unit) of one family member, for inspection.
struct RatioProfile {
  std::string lemma_id;
  std::size_t member = 0;
  Field xi;
  Field ratio;
};

using FamilyBuilder = std::function<std::vector<Field>(const Profile&)>;

// Admissible f for the H bounds: multiples of (v_eps - 1) times shapes in xi/eps, |f/(v_eps-1)| <= delta.
std::vector<Field> h_family(const Profile& profile, double delta);
// Smooth, effectively compactly supported eta: bumps, dipoles, (v_eps - 1)-weighted bumps.
std::vector<Field> eta_family(const Profile& profile);

std::vector<AuditReport> audit_veps_derivatives(const Profile& profile, int k_max = 3,
                                                std::vector<RatioProfile>* ratios = nullptr);
// sup over v in (1, v_bar) of |psi^(k)(v)| (v-1)^(gamma+k) / eps on n log-spaced samples, k = 1, 2.
std::vector<AuditReport> audit_psi_derivatives(const ModelParams& p, double v_bar, std::size_t n = 2000);
std::vector<AuditReport> audit_h_bounds(const Profile& profile, double delta, const FamilyBuilder& family = {},
                                        std::vector<RatioProfile>* ratios = nullptr);

Field l_eps_apply(std::span<const double> eta, const Profile& profile);
Field c_eps_apply(std::span<const double> eta, const Profile& profile);

// Terms of int L(eta) eta with I3 and I4 integrated by parts.
struct QuadraticSplit {
  double i1 = 0.0, i2 = 0.0, i3 = 0.0, i4 = 0.0;
  double assembled = 0.0;
  double sum() const { return i1 + i2 + i3 + i4; }
};
QuadraticSplit l_eps_quadratic_split(std::span<const double> eta, const Profile& profile);

std::vector<AuditReport> audit_linear_operator_bounds(const Profile& profile, double alpha,
                                                      const FamilyBuilder& family = {});

}  // namespace cw
