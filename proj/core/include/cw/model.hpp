#pragma once

namespace cw {

// Lagrangian Aw-Rascle parameters; v_- = 1 is fixed. The shock speed s is derived.
class ModelParams {
public:
  ModelParams(double epsilon, double gamma, double v_plus, double u_plus, double u_minus);
  static ModelParams defaults() { return ModelParams(0.1, 1.0, 2.0, 0.0, 1.0); }

  double epsilon() const noexcept { return epsilon_; }
  double gamma() const noexcept { return gamma_; }
  double v_plus() const noexcept { return v_plus_; }
  double u_plus() const noexcept { return u_plus_; }
  double u_minus() const noexcept { return u_minus_; }
  double s() const noexcept { return s_; }

  ModelParams with_epsilon(double epsilon) const {
    return ModelParams(epsilon, gamma_, v_plus_, u_plus_, u_minus_);
  }
  ModelParams with_gamma(double gamma) const { return ModelParams(epsilon_, gamma, v_plus_, u_plus_, u_minus_); }

private:
  double epsilon_;
  double gamma_;
  double v_plus_;
  double u_plus_;
  double u_minus_;
  double s_;
};

struct EnvelopeConstants {
  double a0, a1, a2, a3, b;
};

double shock_speed(double u_minus, double u_plus, double v_plus);
inline double shock_speed(const ModelParams& p) { return p.s(); }

double phi(double v, const ModelParams& p);
// k in {1, 2}
double phi_derivative(double v, int k, const ModelParams& p);
// Antiderivative of phi with psi(v_plus) = 0.
double psi(double v, const ModelParams& p);
// psi(v+f) - psi(v) - phi(v) f, evaluated through the integral Taylor remainder.
double h_function(double f, double v_eps, const ModelParams& p);
double delta_phi(double f, double v_eps, const ModelParams& p);
EnvelopeConstants envelope_constants(const ModelParams& p);

// (psi(b) - psi(a)) / (b - a) by 3-point Gauss-Legendre in v; tends to phi(a) as b -> a.
double phi_face_mean(double a, double b, const ModelParams& p);

// phi without the domain check, for inner loops that have already validated v > 1.
inline double phi_unchecked(double v, double eps_gamma, double gamma) noexcept;

}  // namespace cw

#include <cmath>

namespace cw {

inline double phi_unchecked(double v, double eps_gamma, double gamma) noexcept {
  const double d = v - 1.0;
  double dg;
  if (gamma == 1.0)
    dg = d * d;
  else if (gamma == 2.0)
    dg = d * d * d;
  else
    dg = std::pow(d, gamma + 1.0);
  return eps_gamma / (v * dg);
}

}  // namespace cw
