#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cw {

using Field = std::vector<double>;

// Uniform grid on [xi_min, xi_max] with n nodes; must cover xi = 0 to within dx/2.
class Grid {
public:
  Grid(double xi_min, double xi_max, std::size_t n);

  double xi_min() const noexcept { return xi_min_; }
  double xi_max() const noexcept { return xi_max_; }
  double dx() const noexcept { return dx_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t size() const noexcept { return n_; }
  double x(std::size_t i) const noexcept { return xi_min_ + static_cast<double>(i) * dx_; }

  Field nodes() const;
  std::size_t nearest(double xi) const;
  // Same interval with 2n-1 nodes, so every old node is kept.
  Grid refined() const;
  Grid shifted(double offset) const;

  bool operator==(const Grid&) const = default;

private:
  double xi_min_;
  double xi_max_;
  std::size_t n_;
  double dx_;
};

Field diff1(std::span<const double> f, const Grid& grid);
Field diff2(std::span<const double> f, const Grid& grid);
// d/dx (coef d/dx f) in flux form with arithmetic-mean face coefficients.
Field div_flux(std::span<const double> coef, std::span<const double> f, const Grid& grid);

double trapz(std::span<const double> f, const Grid& grid);
Field cumtrapz(std::span<const double> f, const Grid& grid);

// Row i reads sub[i] x[i-1] + diag[i] x[i] + super[i] x[i+1] = rhs[i];
// sub[0] and super[n-1] are ignored.
struct TridiagonalSystem {
  Field sub;
  Field diag;
  Field super;
  Field rhs;
};

struct TridiagonalSolution {
  Field x;
  double residual_inf = 0.0;
  bool diagonally_dominant = true;
};

TridiagonalSolution solve_tridiagonal(const TridiagonalSystem& sys);

// Allocation-free Thomas sweep for hot loops; scratch is resized as needed.
// Overwrites x with the solution. Throws singular-pivot on a zero pivot.
void thomas_solve(std::span<const double> sub, std::span<const double> diag,
                  std::span<const double> super, std::span<const double> rhs,
                  std::span<double> x, std::vector<double>& scratch);

double max_abs(std::span<const double> f);
double max_abs_diff(std::span<const double> a, std::span<const double> b);

}  // namespace cw
