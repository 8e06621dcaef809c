#include "cw/audit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "cw/error.hpp"

namespace cw {

namespace {

constexpr double tiny_denominator = 1e-14;

struct Coefficients {
  Field d;      // v - 1
  Field v1;     // v'
  Field v2;     // v''
  Field phi0;   // phi(v)
  Field phi1;   // phi'(v)
  Field phi2;   // phi''(v)
};

Coefficients coefficients(const Profile& profile) {
  const auto& p = profile.params();
  const auto& v = profile.v_eps();
  Coefficients c;
  const std::size_t n = v.size();
  for (Field* f : {&c.d, &c.v1, &c.v2, &c.phi0, &c.phi1, &c.phi2}) f->resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    c.d[i] = v[i] - 1.0;
    c.v1[i] = profile_derivative_at(v[i], 1, p);
    c.v2[i] = profile_derivative_at(v[i], 2, p);
    c.phi0[i] = phi(v[i], p);
    c.phi1[i] = phi_derivative(v[i], 1, p);
    c.phi2[i] = phi_derivative(v[i], 2, p);
  }
  return c;
}

void require_size(std::span<const double> f, const Profile& profile, const char* what) {
  if (f.size() != profile.grid().n())
    throw Error(ErrorKind::size_mismatch, std::string(what) + ": field does not match profile grid");
}

Profile refine(const Profile& profile) {
  ProfileOptions opt;
  opt.anchor_xi = profile.anchor_xi();
  return solve_profile(profile.params(), profile.grid().refined(), opt);
}

double refinement_ratio(double base, double fine) {
  if (base == 0.0 && fine == 0.0) return 1.0;
  if (base == 0.0) return std::numeric_limits<double>::infinity();
  return fine / base;
}

void finish(AuditReport& r) {
  r.refinement_ratio = refinement_ratio(r.fitted_constant, r.fitted_refined);
  r.pass = std::isfinite(r.fitted_constant) && std::isfinite(r.fitted_refined) && r.refinement_ratio >= 0.8 &&
           r.refinement_ratio <= 1.25;
}

// Pointwise sup of lhs/rhs over a family, skipping near-zero right-hand sides.
struct PointwiseFit {
  double constant = 0.0;
  WorstPoint worst;
  void add(double lhs, double rhs, double xi, std::size_t member) {
    if (!(rhs >= tiny_denominator)) return;
    const double r = lhs / rhs;
    if (r > constant) {
      constant = r;
      worst = {xi, lhs, rhs, member};
    }
  }
};

std::vector<Field> shapes_in_scaled_xi(const Profile& profile, double amplitude, bool weighted) {
  const Grid& g = profile.grid();
  const double eps = profile.params().epsilon();
  const auto& v = profile.v_eps();
  struct Shape {
    double center;
    double width;
    bool dipole;
    double sign;
  };
  const std::vector<Shape> shapes = weighted ? std::vector<Shape>{{-10.0, 2.0, false, 1.0},
                                                                  {-2.0, 2.0, true, 1.0},
                                                                  {0.0, 1.5, false, -1.0},
                                                                  {0.0, 1.5, true, -1.0},
                                                                  {1.0, 1.0, false, 1.0},
                                                                  {3.0, 2.0, true, 1.0},
                                                                  {5.0, 1.0, false, -1.0},
                                                                  {-5.0, 1.0, true, -1.0}}
                                             : std::vector<Shape>{{-5.0, 1.5, false, 1.0},
                                                                  {-1.0, 1.5, false, 1.0},
                                                                  {0.0, 1.0, false, 1.0},
                                                                  {1.0, 1.5, false, 1.0},
                                                                  {4.0, 1.5, false, 1.0},
                                                                  {-2.0, 1.5, true, 1.0},
                                                                  {0.0, 1.5, true, 1.0},
                                                                  {2.0, 1.5, true, 1.0},
                                                                  {-8.0, 3.0, true, 1.0}};
  std::vector<Field> out;
  for (const auto& s : shapes) {
    Field f(g.n());
    for (std::size_t i = 0; i < g.n(); ++i) {
      const double x = (g.x(i) / eps - s.center) / s.width;
      double shape = std::exp(-x * x);
      if (s.dipole) shape *= x * std::sqrt(2.0) * std::exp(0.5);
      f[i] = s.sign * amplitude * shape * (weighted ? v[i] - 1.0 : 1.0);
    }
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace

std::vector<Field> h_family(const Profile& profile, double delta) {
  const auto& v = profile.v_eps();
  std::vector<Field> out;
  for (double theta : {0.3, -0.3, delta, -delta}) {
    Field f(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) f[i] = theta * (v[i] - 1.0);
    out.push_back(std::move(f));
  }
  for (auto& f : shapes_in_scaled_xi(profile, delta, true)) out.push_back(std::move(f));
  return out;
}

std::vector<Field> eta_family(const Profile& profile) {
  auto out = shapes_in_scaled_xi(profile, 1.0, false);
  const Grid& g = profile.grid();
  const double eps = profile.params().epsilon();
  const auto& v = profile.v_eps();
  for (double c : {-3.0, 0.0, 2.0}) {
    Field f(g.n());
    for (std::size_t i = 0; i < g.n(); ++i) {
      const double x = (g.x(i) / eps - c) / 1.5;
      f[i] = (v[i] - 1.0) * std::exp(-x * x);
    }
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<AuditReport> audit_veps_derivatives(const Profile& profile, int k_max, std::vector<RatioProfile>* ratios) {
  if (k_max < 1 || k_max > 3)
    throw Error(ErrorKind::unsupported_order, "audit_veps_derivatives: k_max must be in 1..3");
  const Profile fine = refine(profile);
  const auto& p = profile.params();
  const double eps = p.epsilon();
  auto fit = [&](const Profile& prof, int k, RatioProfile* rp) {
    PointwiseFit f;
    const auto& v = prof.v_eps();
    const Grid& g = prof.grid();
    if (rp) {
      rp->xi = g.nodes();
      rp->ratio.resize(g.n());
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double lhs = std::abs(profile_derivative_at(v[i], k, p)) * std::pow(eps, k);
      const double rhs = std::pow(v[i] - 1.0, k * p.gamma() + 1.0);
      f.add(lhs, rhs, g.x(i), 0);
      if (rp) rp->ratio[i] = rhs > 0.0 ? lhs / rhs : 0.0;
    }
    return f;
  };
  std::vector<AuditReport> out;
  for (int k = 1; k <= k_max; ++k) {
    RatioProfile rp;
    rp.lemma_id = "veps_derivative_k" + std::to_string(k);
    const auto base = fit(profile, k, ratios ? &rp : nullptr);
    const auto refined = fit(fine, k, nullptr);
    AuditReport r;
    r.lemma_id = rp.lemma_id;
    r.fitted_constant = base.constant;
    r.fitted_refined = refined.constant;
    r.worst = base.worst;
    finish(r);
    out.push_back(r);
    if (ratios) ratios->push_back(std::move(rp));
  }
  return out;
}

std::vector<AuditReport> audit_psi_derivatives(const ModelParams& p, double v_bar, std::size_t n) {
  if (!(v_bar > 1.0)) throw Error(ErrorKind::invalid_parameters, "audit_psi_derivatives: v_bar must exceed 1");
  auto fit = [&](int k, std::size_t m) {
    PointwiseFit f;
    const double lo = std::log(1e-8 * (v_bar - 1.0));
    const double hi = std::log(v_bar - 1.0);
    for (std::size_t i = 0; i < m; ++i) {
      const double d = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(m));
      const double v = 1.0 + d;
      const double deriv = k == 1 ? phi(v, p) : phi_derivative(v, 1, p);
      f.add(std::abs(deriv) * std::pow(d, p.gamma() + k), p.epsilon(), v, 0);
    }
    return f;
  };
  std::vector<AuditReport> out;
  for (int k = 1; k <= 2; ++k) {
    const auto base = fit(k, n);
    const auto refined = fit(k, 2 * n);
    AuditReport r;
    r.lemma_id = "psi_derivative_k" + std::to_string(k);
    r.fitted_constant = base.constant;
    r.fitted_refined = refined.constant;
    r.worst = base.worst;
    finish(r);
    out.push_back(r);
  }
  return out;
}

namespace {

std::array<PointwiseFit, 3> fit_h(const Profile& prof, const std::vector<Field>& family, double delta,
                                  std::vector<RatioProfile>* ratios) {
  const auto& p = prof.params();
  const Grid& g = prof.grid();
  const double eps = p.epsilon();
  const double gam = p.gamma();
  const Coefficients c = coefficients(prof);
  const auto& v = prof.v_eps();
  std::array<PointwiseFit, 3> fits;
  for (std::size_t m = 0; m < family.size(); ++m) {
    const Field& f = family[m];
    require_size(f, prof, "audit_h_bounds");
    for (std::size_t i = 0; i < f.size(); ++i)
      if (std::abs(f[i]) > delta * c.d[i] * (1.0 + 1e-12))
        throw Error(ErrorKind::admissibility, "audit_h_bounds: member " + std::to_string(m) +
                                                  " violates |f/(v_eps-1)| <= delta at xi = " +
                                                  std::to_string(g.x(i)));
    const Field f1 = diff1(f, g);
    const Field f2 = diff2(f, g);
    std::array<RatioProfile, 3> rp;
    const char* ids[3] = {"H", "dxH", "dx2H"};
    for (int j = 0; j < 3; ++j) {
      rp[j].lemma_id = ids[j];
      rp[j].member = m;
      rp[j].xi = g.nodes();
      rp[j].ratio.assign(g.n(), 0.0);
    }
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (f[i] == 0.0) continue;
      const double d = c.d[i];
      const double vf = v[i] + f[i];
      const double dphi = phi(vf, p) - c.phi0[i];
      const double rem1 = dphi - c.phi1[i] * f[i];
      const double dphi1 = phi_derivative(vf, 1, p) - c.phi1[i];
      const double rem2 = dphi1 - c.phi2[i] * f[i];
      const double ff = f[i] * f[i];
      const double w_far = eps / std::pow(d, gam + 2.0);

      const double h = std::abs(h_function(f[i], v[i], p));
      const double dh = std::abs(c.v1[i] * rem1 + f1[i] * dphi);
      const double d2h = std::abs(c.v2[i] * rem1 + f1[i] * f1[i] * phi_derivative(vf, 1, p) +
                                  c.v1[i] * c.v1[i] * rem2 + 2.0 * f1[i] * c.v1[i] * dphi1 + f2[i] * dphi);
      const double rhs_h = w_far * ff;
      const double rhs_dh = ff / (d * d) + w_far * std::abs(f[i] * f1[i]);
      const double rhs_d2h =
          std::pow(d, gam - 2.0) * ff / eps + w_far * std::abs(f[i] * f2[i]) + w_far * f1[i] * f1[i];
      fits[0].add(h, rhs_h, g.x(i), m);
      fits[1].add(dh, rhs_dh, g.x(i), m);
      fits[2].add(d2h, rhs_d2h, g.x(i), m);
      if (ratios) {
        if (rhs_h >= tiny_denominator) rp[0].ratio[i] = h / rhs_h;
        if (rhs_dh >= tiny_denominator) rp[1].ratio[i] = dh / rhs_dh;
        if (rhs_d2h >= tiny_denominator) rp[2].ratio[i] = d2h / rhs_d2h;
      }
    }
    if (ratios)
      for (auto& r : rp) ratios->push_back(std::move(r));
  }
  return fits;
}

}  // namespace

std::vector<AuditReport> audit_h_bounds(const Profile& profile, double delta, const FamilyBuilder& family,
                                        std::vector<RatioProfile>* ratios) {
  if (!(delta > 0.0 && delta < 1.0))
    throw Error(ErrorKind::admissibility, "audit_h_bounds: delta must lie in (0, 1)");
  const FamilyBuilder build = family ? family : [delta](const Profile& pr) { return h_family(pr, delta); };
  const Profile fine = refine(profile);
  const auto base = fit_h(profile, build(profile), delta, ratios);
  const auto refined = fit_h(fine, build(fine), delta, nullptr);
  const char* ids[3] = {"H", "dxH", "dx2H"};
  std::vector<AuditReport> out;
  for (int j = 0; j < 3; ++j) {
    AuditReport r;
    r.lemma_id = ids[j];
    r.fitted_constant = base[j].constant;
    r.fitted_refined = refined[j].constant;
    r.worst = base[j].worst;
    finish(r);
    out.push_back(r);
  }
  return out;
}

Field l_eps_apply(std::span<const double> eta, const Profile& profile) {
  require_size(eta, profile, "l_eps_apply");
  const Grid& g = profile.grid();
  const double s = profile.params().s();
  const Coefficients c = coefficients(profile);
  const std::size_t n = eta.size();
  const Field deta = diff1(eta, g);
  Field t3(n), t4(n);
  for (std::size_t i = 0; i < n; ++i) {
    t3[i] = eta[i] * c.phi0[i] * c.v1[i] / c.d[i];
    t4[i] = c.phi1[i] * c.v1[i] * c.d[i] * eta[i];
  }
  const Field dt3 = diff1(t3, g);
  const Field dt4 = diff1(t4, g);
  Field out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double g1 = c.v1[i] / c.d[i];
    const double g2 = c.phi0[i] * g1;
    out[i] = s * eta[i] * g1 + g2 * (deta[i] + eta[i] * g1) + dt3[i] + dt4[i] / c.d[i];
  }
  return out;
}

Field c_eps_apply(std::span<const double> eta, const Profile& profile) {
  require_size(eta, profile, "c_eps_apply");
  const Grid& g = profile.grid();
  const double s = profile.params().s();
  const Coefficients c = coefficients(profile);
  const std::size_t n = eta.size();
  const Field deta = diff1(eta, g);
  Field a(n), b(n), e(n), h(n);
  Field g1p(n), g2p(n), g4p(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = c.d[i], v1 = c.v1[i], v2 = c.v2[i];
    const double f0 = c.phi0[i], f1 = c.phi1[i], f2 = c.phi2[i];
    g1p[i] = v2 / d - v1 * v1 / (d * d);
    g2p[i] = f1 * v1 * v1 / d + f0 * v2 / d - f0 * v1 * v1 / (d * d);
    g4p[i] = f1 * v1 * v1 * v1 / (d * d) + 2.0 * f0 * v1 * v2 / (d * d) - 2.0 * f0 * v1 * v1 * v1 / (d * d * d);
    const double g3 = f1 * v1 * d;
    const double g3p = f2 * v1 * v1 * d + f1 * v2 * d + f1 * v1 * v1;
    a[i] = f1 * v1 * deta[i];
    b[i] = eta[i] * g2p[i];
    e[i] = g3 * eta[i];
    h[i] = g3p * eta[i];
  }
  const Field da = diff1(a, g);
  const Field db = diff1(b, g);
  const Field de = diff1(e, g);
  const Field dh = diff1(h, g);
  Field out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = c.d[i];
    out[i] = da[i] + s * eta[i] * g1p[i] + g2p[i] * deta[i] + g4p[i] * eta[i] + db[i] - c.v1[i] / (d * d) * de[i] +
             dh[i] / d;
  }
  return out;
}

QuadraticSplit l_eps_quadratic_split(std::span<const double> eta, const Profile& profile) {
  require_size(eta, profile, "l_eps_quadratic_split");
  const Grid& g = profile.grid();
  const double s = profile.params().s();
  const Coefficients c = coefficients(profile);
  const std::size_t n = eta.size();
  const Field deta = diff1(eta, g);
  Field i1(n), i2(n), i3(n), i4(n), q(n);
  const Field l = l_eps_apply(eta, profile);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = c.d[i];
    const double g1 = c.v1[i] / d;
    const double g2 = c.phi0[i] * g1;
    const double dV = eta[i] * d;
    i1[i] = s * eta[i] * eta[i] * g1;
    i2[i] = g2 * eta[i] * (deta[i] + eta[i] * g1);
    i3[i] = -deta[i] * eta[i] * g2;
    i4[i] = -deta[i] / d * c.v1[i] * c.phi1[i] * dV + c.v1[i] * c.v1[i] * eta[i] / (d * d) * c.phi1[i] * dV;
    q[i] = l[i] * eta[i];
  }
  return {trapz(i1, g), trapz(i2, g), trapz(i3, g), trapz(i4, g), trapz(q, g)};
}

namespace {

struct IntegralFit {
  double constant = 0.0;
  WorstPoint worst;
};

std::array<IntegralFit, 2> fit_linear(const Profile& prof, const std::vector<Field>& family, double alpha) {
  const Grid& g = prof.grid();
  const double eps = prof.params().epsilon();
  const Coefficients c = coefficients(prof);
  std::array<IntegralFit, 2> fits;
  const std::size_t n = g.n();
  for (std::size_t m = 0; m < family.size(); ++m) {
    const Field& eta = family[m];
    require_size(eta, prof, "audit_linear_operator_bounds");
    const Field deta = diff1(eta, g);
    const Field d2eta = diff1(deta, g);
    const Field l = l_eps_apply(eta, prof);
    const Field ce = c_eps_apply(eta, prof);
    Field q1(n), q2(n), a1(n), a2(n), b1(n), b2(n);
    std::size_t peak = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dV = eta[i] * c.d[i];
      q1[i] = l[i] * eta[i];
      q2[i] = ce[i] * deta[i];
      a1[i] = c.phi0[i] * deta[i] * deta[i];
      a2[i] = c.phi0[i] * d2eta[i] * d2eta[i];
      b1[i] = c.phi0[i] * dV * dV;
      b2[i] = c.phi0[i] * (deta[i] * deta[i] + dV * dV / (eps * eps));
      if (std::abs(eta[i]) > std::abs(eta[peak])) peak = i;
    }
    const double lhs[2] = {std::abs(trapz(q1, g)), std::abs(trapz(q2, g))};
    const double apart[2] = {alpha * trapz(a1, g), alpha * trapz(a2, g)};
    const double unit[2] = {trapz(b1, g) / (alpha * eps * eps), trapz(b2, g) / (alpha * eps * eps)};
    for (int j = 0; j < 2; ++j) {
      if (!(unit[j] >= tiny_denominator)) continue;
      const double cfit = std::max(0.0, lhs[j] - apart[j]) / unit[j];
      if (cfit > fits[j].constant || (m == 0 && fits[j].constant == 0.0)) {
        fits[j].constant = std::max(fits[j].constant, cfit);
        fits[j].worst = {g.x(peak), lhs[j], apart[j] + cfit * unit[j], m};
      }
    }
  }
  return fits;
}

}  // namespace

std::vector<AuditReport> audit_linear_operator_bounds(const Profile& profile, double alpha, const FamilyBuilder& family) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw Error(ErrorKind::admissibility, "audit_linear_operator_bounds: alpha must lie in (0, 1)");
  const FamilyBuilder build = family ? family : FamilyBuilder(eta_family);
  const Profile fine = refine(profile);
  const auto base = fit_linear(profile, build(profile), alpha);
  const auto refined = fit_linear(fine, build(fine), alpha);
  const char* ids[2] = {"linear_estimate_L", "linear_estimate_C"};
  std::vector<AuditReport> out;
  for (int j = 0; j < 2; ++j) {
    AuditReport r;
    r.lemma_id = ids[j];
    r.fitted_constant = base[j].constant;
    r.fitted_refined = refined[j].constant;
    r.worst = base[j].worst;
    finish(r);
    out.push_back(r);
  }
  return out;
}

}  // namespace cw
