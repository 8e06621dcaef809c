#include "cw/model.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <sstream>
#include <string>

#include "cw/error.hpp"

namespace cw {

namespace {

using boost::math::quadrature::gauss_kronrod;

std::string num(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

void require_uncongested(double v, const char* what) {
  if (!(v > 1.0)) throw Error(ErrorKind::domain, std::string(what) + ": requires v > 1, got v = " + num(v));
}

double phi_raw(double v, const ModelParams& p) { return phi_unchecked(v, p.epsilon() * p.gamma(), p.gamma()); }

double phi_prime_raw(double v, const ModelParams& p) {
  return -phi_raw(v, p) * (1.0 / v + (p.gamma() + 1.0) / (v - 1.0));
}

double psi_gamma1(double v, double eps) { return eps * (std::log(v / (v - 1.0)) - 1.0 / (v - 1.0)); }

}  // namespace

ModelParams::ModelParams(double epsilon, double gamma, double v_plus, double u_plus, double u_minus)
    : epsilon_(epsilon), gamma_(gamma), v_plus_(v_plus), u_plus_(u_plus), u_minus_(u_minus) {
  if (!(std::isfinite(epsilon) && epsilon > 0.0))
    throw Error(ErrorKind::invalid_parameters, "epsilon must satisfy epsilon > 0, got " + num(epsilon));
  if (!(std::isfinite(gamma) && gamma >= 1.0))
    throw Error(ErrorKind::invalid_parameters, "gamma must satisfy gamma >= 1, got " + num(gamma));
  if (!std::isfinite(u_plus) || !std::isfinite(u_minus))
    throw Error(ErrorKind::invalid_parameters, "u_plus and u_minus must be finite");
  s_ = shock_speed(u_minus, u_plus, v_plus);
}

double shock_speed(double u_minus, double u_plus, double v_plus) {
  if (!(std::isfinite(v_plus) && v_plus > 1.0))
    throw Error(ErrorKind::invalid_parameters, "v_plus must satisfy v_plus > 1, got " + num(v_plus));
  if (!(u_minus > u_plus))
    throw Error(ErrorKind::invalid_parameters,
                "u_minus must exceed u_plus (no shock otherwise), got u_minus = " + num(u_minus) +
                    ", u_plus = " + num(u_plus));
  return (u_minus - u_plus) / (v_plus - 1.0);
}

double phi(double v, const ModelParams& p) {
  require_uncongested(v, "phi");
  return phi_raw(v, p);
}

double phi_derivative(double v, int k, const ModelParams& p) {
  require_uncongested(v, "phi_derivative");
  const double g1 = p.gamma() + 1.0;
  const double a = 1.0 / v + g1 / (v - 1.0);
  switch (k) {
    case 1: return -phi_raw(v, p) * a;
    case 2: return phi_raw(v, p) * (a * a + 1.0 / (v * v) + g1 / ((v - 1.0) * (v - 1.0)));
    default:
      throw Error(ErrorKind::unsupported_order, "phi_derivative: order " + std::to_string(k) + " not in {1, 2}");
  }
}

double psi(double v, const ModelParams& p) {
  require_uncongested(v, "psi");
  const double eps = p.epsilon();
  const double vp = p.v_plus();
  if (p.gamma() == 1.0) return psi_gamma1(v, eps) - psi_gamma1(vp, eps);
  if (v == vp) return 0.0;
  // In x = ln(v - 1) the integrand eps*gamma*exp(-gamma x)/(1 + exp(x)) is smooth.
  const double g = p.gamma();
  auto integrand = [eps, g](double x) { return eps * g * std::exp(-g * x) / (1.0 + std::exp(x)); };
  const double a = std::log(vp - 1.0), b = std::log(v - 1.0);
  const double value = gauss_kronrod<double, 61>::integrate(integrand, a, b, 8, 1e-13);
  const double coarse = gauss_kronrod<double, 31>::integrate(integrand, a, b, 8, 1e-13);
  if (!(std::abs(value - coarse) <= 1e-12 + 1e-13 * std::abs(value)))
    throw Error(ErrorKind::solver_failure, "psi: quadrature did not converge at v = " + num(v));
  return value;
}

double h_function(double f, double v_eps, const ModelParams& p) {
  require_uncongested(v_eps, "h_function");
  require_uncongested(v_eps + f, "h_function (v_eps + f)");
  if (f == 0.0) return 0.0;
  auto integrand = [&](double th) { return (1.0 - th) * phi_prime_raw(v_eps + th * f, p); };
  const double r = gauss_kronrod<double, 31>::integrate(integrand, 0.0, 1.0, 10, 1e-13);
  return f * f * r;
}

double delta_phi(double f, double v_eps, const ModelParams& p) {
  require_uncongested(v_eps, "delta_phi");
  require_uncongested(v_eps + f, "delta_phi (v_eps + f)");
  return phi_raw(v_eps + f, p) - phi_raw(v_eps, p);
}

EnvelopeConstants envelope_constants(const ModelParams& p) {
  const double s = p.s();
  const double vp = p.v_plus();
  const double g = p.gamma();
  const double m = std::pow(vp - 1.0, g + 1.0);
  EnvelopeConstants c{};
  c.a0 = s * (vp - 1.0) * (vp + 1.0) / 2.0;
  c.a1 = s * (vp - 1.0) / 2.0;
  c.b = std::pow(2.0 / (vp - 1.0), g);
  c.a2 = s * (vp + 1.0) * m / (std::pow(2.0, g + 2.0) * g);
  c.a3 = s * vp * m / g;
  return c;
}

double phi_face_mean(double a, double b, const ModelParams& p) {
  static constexpr double node = 0.38729833462074168852;  // sqrt(3/5)/2
  const double eg = p.epsilon() * p.gamma();
  const double g = p.gamma();
  const double mid = 0.5 * (a + b);
  const double half = b - a;
  return (5.0 * phi_unchecked(mid - node * half, eg, g) + 8.0 * phi_unchecked(mid, eg, g) +
          5.0 * phi_unchecked(mid + node * half, eg, g)) /
         18.0;
}

}  // namespace cw
