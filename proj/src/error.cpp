#include "error.hpp"

namespace vardiss {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::dimension_mismatch: return "dimension_mismatch";
    case ErrorKind::singular_dissipation: return "singular_dissipation";
    case ErrorKind::degenerate_mass: return "degenerate_mass";
    case ErrorKind::stiffness: return "stiffness";
    case ErrorKind::instability: return "instability";
    case ErrorKind::density_collapse: return "density_collapse";
    case ErrorKind::unknown_suite: return "unknown_suite";
  }
  return "unknown";
}

}  // namespace vardiss
