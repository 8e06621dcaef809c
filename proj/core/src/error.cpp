#include "cw/error.hpp"

namespace cw {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_parameters: return "invalid-parameters";
    case ErrorKind::domain: return "domain-error";
    case ErrorKind::unsupported_order: return "unsupported-order";
    case ErrorKind::resolution: return "resolution-error";
    case ErrorKind::solver_failure: return "solver-failure";
    case ErrorKind::size_mismatch: return "size-mismatch";
    case ErrorKind::nonpositive_coefficient: return "nonpositive-coefficient";
    case ErrorKind::singular_pivot: return "singular-pivot";
    case ErrorKind::congestion: return "congestion-error";
    case ErrorKind::admissibility: return "admissibility-error";
    case ErrorKind::parse: return "parse-error";
    case ErrorKind::validation: return "validation-error";
    case ErrorKind::io: return "io-error";
  }
  return "unknown";
}

}  // namespace cw
