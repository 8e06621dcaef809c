#include "cw/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cw/error.hpp"

namespace cw {

namespace {

void require_size(std::span<const double> f, const Grid& grid, const char* what) {
  if (f.size() != grid.n())
    throw Error(ErrorKind::size_mismatch, std::string(what) + ": field has " + std::to_string(f.size()) +
                                              " samples, grid has " + std::to_string(grid.n()));
}

}  // namespace

Grid::Grid(double xi_min, double xi_max, std::size_t n) : xi_min_(xi_min), xi_max_(xi_max), n_(n) {
  if (n < 3) throw Error(ErrorKind::invalid_parameters, "grid needs n >= 3");
  if (!(xi_max > xi_min) || !std::isfinite(xi_min) || !std::isfinite(xi_max))
    throw Error(ErrorKind::invalid_parameters, "grid needs finite xi_min < xi_max");
  dx_ = (xi_max - xi_min) / static_cast<double>(n - 1);
  if (xi_min - 0.5 * dx_ > 0.0 || xi_max + 0.5 * dx_ < 0.0)
    throw Error(ErrorKind::invalid_parameters, "grid must contain a node within dx/2 of xi = 0");
}

Field Grid::nodes() const {
  Field out(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = x(i);
  return out;
}

std::size_t Grid::nearest(double xi) const {
  double r = std::round((xi - xi_min_) / dx_);
  r = std::clamp(r, 0.0, static_cast<double>(n_ - 1));
  return static_cast<std::size_t>(r);
}

Grid Grid::refined() const { return Grid(xi_min_, xi_max_, 2 * n_ - 1); }

Grid Grid::shifted(double offset) const { return Grid(xi_min_ + offset, xi_max_ + offset, n_); }

Field diff1(std::span<const double> f, const Grid& grid) {
  require_size(f, grid, "diff1");
  const std::size_t n = f.size();
  const double h = grid.dx();
  Field d(n);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
  return d;
}

Field diff2(std::span<const double> f, const Grid& grid) {
  require_size(f, grid, "diff2");
  const std::size_t n = f.size();
  const double h2 = grid.dx() * grid.dx();
  Field d(n);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / h2;
  if (n >= 4) {
    d[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2;
    d[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / h2;
  } else {
    d[0] = d[1];
    d[n - 1] = d[n - 2];
  }
  return d;
}

Field div_flux(std::span<const double> coef, std::span<const double> f, const Grid& grid) {
  require_size(coef, grid, "div_flux coef");
  require_size(f, grid, "div_flux");
  for (std::size_t i = 0; i < coef.size(); ++i)
    if (!(coef[i] > 0.0))
      throw Error(ErrorKind::nonpositive_coefficient,
                  "div_flux: coefficient must be positive, got " + std::to_string(coef[i]) + " at node " +
                      std::to_string(i));
  const std::size_t n = f.size();
  const double h2 = grid.dx() * grid.dx();
  Field d(n);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double cp = 0.5 * (coef[i] + coef[i + 1]);
    const double cm = 0.5 * (coef[i] + coef[i - 1]);
    d[i] = (cp * (f[i + 1] - f[i]) - cm * (f[i] - f[i - 1])) / h2;
  }
  const Field f1 = diff1(f, grid);
  const Field f2 = diff2(f, grid);
  const Field c1 = diff1(coef, grid);
  for (std::size_t i : {std::size_t{0}, n - 1}) d[i] = coef[i] * f2[i] + c1[i] * f1[i];
  return d;
}

double trapz(std::span<const double> f, const Grid& grid) {
  require_size(f, grid, "trapz");
  double s = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
  return s * grid.dx();
}

Field cumtrapz(std::span<const double> f, const Grid& grid) {
  require_size(f, grid, "cumtrapz");
  Field out(f.size());
  out[0] = 0.0;
  const double h = 0.5 * grid.dx();
  for (std::size_t i = 1; i < f.size(); ++i) out[i] = out[i - 1] + h * (f[i - 1] + f[i]);
  return out;
}

void thomas_solve(std::span<const double> sub, std::span<const double> diag, std::span<const double> super,
                  std::span<const double> rhs, std::span<double> x, std::vector<double>& scratch) {
  const std::size_t n = diag.size();
  if (sub.size() != n || super.size() != n || rhs.size() != n || x.size() != n)
    throw Error(ErrorKind::size_mismatch, "tridiagonal: inconsistent band sizes");
  scratch.resize(n);
  double pivot = diag[0];
  if (pivot == 0.0 || !std::isfinite(pivot))
    throw Error(ErrorKind::singular_pivot, "tridiagonal: zero pivot in row 0");
  x[0] = rhs[0] / pivot;
  for (std::size_t i = 1; i < n; ++i) {
    scratch[i] = super[i - 1] / pivot;
    pivot = diag[i] - sub[i] * scratch[i];
    if (pivot == 0.0 || !std::isfinite(pivot))
      throw Error(ErrorKind::singular_pivot, "tridiagonal: zero pivot in row " + std::to_string(i));
    x[i] = (rhs[i] - sub[i] * x[i - 1]) / pivot;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= scratch[i + 1] * x[i + 1];
}

TridiagonalSolution solve_tridiagonal(const TridiagonalSystem& sys) {
  const std::size_t n = sys.diag.size();
  if (n == 0) throw Error(ErrorKind::size_mismatch, "tridiagonal: empty system");
  for (std::size_t i = 0; i < n; ++i)
    if (sys.diag[i] == 0.0)
      throw Error(ErrorKind::singular_pivot, "tridiagonal: zero diagonal in row " + std::to_string(i));
  TridiagonalSolution out;
  out.x.assign(n, 0.0);
  std::vector<double> scratch;
  thomas_solve(sys.sub, sys.diag, sys.super, sys.rhs, out.x, scratch);
  for (std::size_t i = 0; i < n; ++i) {
    double off = 0.0;
    double ax = sys.diag[i] * out.x[i];
    if (i > 0) {
      off += std::abs(sys.sub[i]);
      ax += sys.sub[i] * out.x[i - 1];
    }
    if (i + 1 < n) {
      off += std::abs(sys.super[i]);
      ax += sys.super[i] * out.x[i + 1];
    }
    if (!(std::abs(sys.diag[i]) > off)) out.diagonally_dominant = false;
    out.residual_inf = std::max(out.residual_inf, std::abs(ax - sys.rhs[i]));
  }
  return out;
}

double max_abs(std::span<const double> f) {
  double m = 0.0;
  for (double v : f) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::size_mismatch, "max_abs_diff: size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace cw
