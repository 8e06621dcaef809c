#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cw {

enum class ErrorKind {
  invalid_parameters,
  domain,
  unsupported_order,
  resolution,
  solver_failure,
  size_mismatch,
  nonpositive_coefficient,
  singular_pivot,
  congestion,
  admissibility,
  parse,
  validation,
  io,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

// Carries the failing simulation time and node along with the congestion event.
class CongestionError : public Error {
public:
  CongestionError(const std::string& what, double t, std::size_t index, double xi, double v)
      : Error(ErrorKind::congestion, what), t_(t), index_(index), xi_(xi), v_(v) {}
  double time() const noexcept { return t_; }
  std::size_t index() const noexcept { return index_; }
  double xi() const noexcept { return xi_; }
  double value() const noexcept { return v_; }

private:
  double t_;
  std::size_t index_;
  double xi_;
  double v_;
};

}  // namespace cw
