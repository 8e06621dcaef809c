#include <doctest.h>

#include <cmath>
#include <map>

#include "cw/audit.hpp"
#include "cw/error.hpp"

using namespace cw;

namespace {

const ModelParams base = ModelParams::defaults();

const Profile& default_profile() {
  static const Profile prof = solve_profile(base, Grid(-10.0, 20.0, 6001));
  return prof;
}

std::map<std::string, AuditReport> by_id(const std::vector<AuditReport>& rs) {
  std::map<std::string, AuditReport> out;
  for (const auto& r : rs) out[r.lemma_id] = r;
  return out;
}

Field bump(const Grid& g, double center, double width) {
  Field f(g.n());
  for (std::size_t i = 0; i < g.n(); ++i) {
    const double x = (g.x(i) - center) / width;
    f[i] = std::exp(-x * x);
  }
  return f;
}

Field combine(double a, const Field& x, double b, const Field& y) {
  Field out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = a * x[i] + b * y[i];
  return out;
}

double worst_relative(const Field& lhs, const Field& rhs) {
  double scale = std::max(max_abs(lhs), max_abs(rhs));
  return scale > 0.0 ? max_abs_diff(lhs, rhs) / scale : 0.0;
}

}  // namespace

TEST_CASE("profile derivative audit") {
  const Profile& prof = default_profile();
  std::vector<RatioProfile> ratios;
  const auto rs = audit_veps_derivatives(prof, 3, &ratios);
  REQUIRE(rs.size() == 3);
  REQUIRE(ratios.size() == 3);
  for (const auto& r : rs) {
    CHECK(r.pass);
    CHECK(std::isfinite(r.fitted_constant));
    CHECK(r.refinement_ratio >= 0.8);
    CHECK(r.refinement_ratio <= 1.25);
  }
  // k = 1: the ratio is s (v_plus - v) v / gamma = 1 - (v - 1)^2 here, largest at the left end of the grid.
  const double v0 = prof.v_eps().front();
  const double s = base.s(), vp = base.v_plus(), g = base.gamma();
  CHECK(rs[0].fitted_constant == doctest::Approx(s * (vp - v0) * v0 / g).epsilon(1e-12));
  CHECK(rs[0].fitted_constant <= s * vp * vp / g);
  CHECK(rs[0].fitted_constant > s * (vp - 1.0) / g - (v0 - 1.0) * (v0 - 1.0) - 1e-12);
  CHECK(rs[0].worst.xi == prof.grid().x(0));
  for (std::size_t i = 0; i < ratios[0].ratio.size(); ++i) CHECK(ratios[0].ratio[i] <= rs[0].fitted_constant);

  const Profile p2 = solve_profile(base.with_gamma(2.0), Grid(-10.0, 20.0, 6001));
  const auto r2 = audit_veps_derivatives(p2, 1);
  REQUIRE(r2.size() == 1);
  CHECK(r2[0].fitted_constant <= s * vp * vp / 2.0);
  CHECK_THROWS_AS(audit_veps_derivatives(prof, 4), Error);
}

TEST_CASE("psi derivative audit") {
  auto rs = by_id(audit_psi_derivatives(base, base.v_plus()));
  // For gamma = 1, |psi'| (v - 1)^2 / eps = 1 / v and |psi''| (v - 1)^3 / eps = (3v - 1) / v^2; both peak as v -> 1.
  CHECK(rs["psi_derivative_k1"].fitted_constant == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(rs["psi_derivative_k2"].fitted_constant == doctest::Approx(2.0).epsilon(1e-7));
  for (const auto& [id, r] : rs) CHECK(r.pass);
  CHECK_THROWS_AS(audit_psi_derivatives(base, 1.0), Error);
}

TEST_CASE("H bounds") {
  const Profile& prof = default_profile();
  const auto rs = by_id(audit_h_bounds(prof, 0.5));
  REQUIRE(rs.size() == 3);
  for (const auto& [id, r] : rs) {
    CHECK(r.pass);
    CHECK(std::isfinite(r.fitted_constant));
    CHECK(r.fitted_constant > 0.0);
  }

  const auto zero = audit_h_bounds(prof, 0.5, [](const Profile& p) { return std::vector<Field>{Field(p.grid().n(), 0.0)}; });
  for (const auto& r : zero) {
    CHECK(r.fitted_constant == 0.0);
    CHECK(r.refinement_ratio == 1.0);
  }

  auto multiple = [](double theta) {
    return [theta](const Profile& p) {
      Field f(p.grid().n());
      for (std::size_t i = 0; i < f.size(); ++i) f[i] = theta * (p.v_eps()[i] - 1.0);
      return std::vector<Field>{f};
    };
  };
  for (const auto& r : audit_h_bounds(prof, 0.5, multiple(0.3))) CHECK(std::isfinite(r.fitted_constant));
  try {
    audit_h_bounds(prof, 0.5, multiple(0.6));
    FAIL("expected admissibility-error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::admissibility);
  }
  CHECK_THROWS_AS(audit_h_bounds(prof, 1.0), Error);

  // The constant depends on delta and grows toward the edge of admissibility.
  double prev = 0.0;
  for (double delta : {0.5, 0.7, 0.9}) {
    const double c = by_id(audit_h_bounds(prof, delta, multiple(-delta)))["H"].fitted_constant;
    CHECK(c > prev);
    prev = c;
  }
}

TEST_CASE("linear operator L") {
  const Profile& prof = default_profile();
  const Grid& g = prof.grid();
  CHECK(max_abs(l_eps_apply(Field(g.n(), 0.0), prof)) == 0.0);
  CHECK(max_abs(c_eps_apply(Field(g.n(), 0.0), prof)) == 0.0);

  const Field e1 = bump(g, 0.0, 0.2), e2 = bump(g, -0.5, 0.4);
  for (auto op : {l_eps_apply, c_eps_apply}) {
    const Field lhs = op(combine(0.7, e1, -2.1, e2), prof);
    const Field rhs = combine(0.7, op(e1, prof), -2.1, op(e2, prof));
    CHECK(worst_relative(lhs, rhs) < 1e-12);
  }

  // Every term carries v_eps', which vanishes in the free tail.
  const Field ones(g.n(), 1.0);
  const Field l = l_eps_apply(ones, prof);
  for (std::size_t i = g.nearest(5.0); i + 1 < g.n(); ++i) CHECK(std::abs(l[i]) < 1e-8);

  // v_eps = v_plus is an exact constant equilibrium: both operators vanish.
  const Profile flat(base, g, Field(g.n(), base.v_plus()));
  CHECK(max_abs(l_eps_apply(e1, flat)) == 0.0);
  CHECK(max_abs(c_eps_apply(e1, flat)) == 0.0);

  CHECK_THROWS_AS(l_eps_apply(Field(5, 1.0), prof), Error);
  CHECK_THROWS_AS(c_eps_apply(Field(5, 1.0), prof), Error);
}

TEST_CASE("commutator expansion matches the operator identity") {
  // C(eta) = d(phi_eps_x d eta) + d L(eta) - L(d eta), all by grid differences.
  auto gap = [](std::size_t n) {
    const Profile prof = solve_profile(base, Grid(-2.0, 2.0, n));
    const Grid& g = prof.grid();
    const Field eta = bump(g, 0.05, 0.15);
    const Field deta = diff1(eta, g);
    Field flux(g.n());
    for (std::size_t i = 0; i < g.n(); ++i) {
      const double v = prof.v_eps()[i];
      flux[i] = phi_derivative(v, 1, base) * profile_derivative_at(v, 1, base) * deta[i];
    }
    const Field a = diff1(flux, g), b = diff1(l_eps_apply(eta, prof), g), c = l_eps_apply(deta, prof);
    const Field direct = c_eps_apply(eta, prof);
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 4; i + 4 < g.n(); ++i) {
      worst = std::max(worst, std::abs(a[i] + b[i] - c[i] - direct[i]));
      scale = std::max(scale, std::abs(direct[i]));
    }
    return worst / scale;
  };
  const double g1 = gap(801), g2 = gap(1601), g3 = gap(3201);
  CHECK(g1 < 0.05);
  CHECK(g1 / g2 > 3.5);
  CHECK(g2 / g3 > 3.5);
}

TEST_CASE("quadratic form split") {
  auto gap = [](std::size_t n) {
    const Profile prof = solve_profile(base, Grid(-3.0, 3.0, n));
    const Field eta = bump(prof.grid(), -0.1, 0.2);
    const QuadraticSplit q = l_eps_quadratic_split(eta, prof);
    CHECK(std::isfinite(q.i1 + q.i2 + q.i3 + q.i4));
    return std::abs(q.sum() - q.assembled) / std::abs(q.assembled);
  };
  const double g1 = gap(601), g2 = gap(1201), g3 = gap(2401);
  CHECK(g1 < 0.05);
  CHECK(g1 / g2 > 3.5);
  CHECK(g2 / g3 > 3.5);
}

TEST_CASE("linear operator estimates") {
  const Profile& prof = default_profile();
  const auto rs = by_id(audit_linear_operator_bounds(prof, 0.25));
  REQUIRE(rs.size() == 2);
  for (const auto& [id, r] : rs) {
    CHECK(r.pass);
    CHECK(std::isfinite(r.fitted_constant));
  }
  CHECK(eta_family(prof).size() == 12);

  const auto zero = audit_linear_operator_bounds(prof, 0.25, [](const Profile& p) {
    return std::vector<Field>{Field(p.grid().n(), 0.0)};
  });
  for (const auto& r : zero) CHECK(r.fitted_constant == 0.0);
  CHECK_THROWS_AS(audit_linear_operator_bounds(prof, 1.0), Error);

  // C = alpha eps^2 (|I| - alpha A) / B, so C / alpha falls as alpha grows.
  double prev = INFINITY;
  for (double alpha : {0.1, 0.25, 0.5}) {
    const double c = by_id(audit_linear_operator_bounds(prof, alpha))["linear_estimate_L"].fitted_constant;
    CHECK(c / alpha < prev);
    prev = c / alpha;
  }
}

TEST_CASE("fitted constants do not depend on epsilon") {
  std::map<std::string, std::vector<double>> consts;
  for (double eps : {0.2, 0.1, 0.05}) {
    const Profile prof = solve_profile(base.with_epsilon(eps), Grid(-10.0, 20.0, 6001));
    for (const auto& r : audit_veps_derivatives(prof)) consts[r.lemma_id].push_back(r.fitted_constant);
    for (const auto& r : audit_h_bounds(prof, 0.5)) consts[r.lemma_id].push_back(r.fitted_constant);
    for (const auto& r : audit_psi_derivatives(prof.params(), prof.params().v_plus()))
      consts[r.lemma_id].push_back(r.fitted_constant);
  }
  for (const auto& [id, cs] : consts) {
    INFO(id);
    REQUIRE(cs.size() == 3);
    const auto [lo, hi] = std::minmax_element(cs.begin(), cs.end());
    CHECK(*hi < 2.0 * *lo);
  }
}
