#include "heirs/numerics/riemannian_cg.hpp"

namespace heirs {

const char* to_string(CgStop stop) {
  switch (stop) {
    case CgStop::kGradientTolerance: return "gradient_tolerance";
    case CgStop::kCostTolerance: return "cost_tolerance";
    case CgStop::kMaxIterations: return "max_iterations";
    case CgStop::kLineSearchFailure: return "line_search_failure";
    case CgStop::kNonFinite: return "non_finite";
  }
  return "unknown";
}

}  // namespace heirs
