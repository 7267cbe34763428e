#include "relcoh/error.hpp"

namespace relcoh {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_domain: return "invalid-domain";
    case ErrorCode::invalid_point: return "invalid-point";
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::empty_partition: return "empty-partition";
    case ErrorCode::out_of_range: return "out-of-range";
    case ErrorCode::diverged: return "diverged";
    case ErrorCode::parse: return "parse";
    case ErrorCode::empty_matrix: return "empty-matrix";
    case ErrorCode::empty_selection: return "empty-selection";
    case ErrorCode::convergence: return "convergence";
    case ErrorCode::undefined_ratio: return "undefined-ratio";
    case ErrorCode::no_split: return "no-split";
    case ErrorCode::undefined_measure: return "undefined-measure";
    case ErrorCode::advisory: return "advisory";
    case ErrorCode::validation: return "validation";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

}  // namespace relcoh
