#include "spectrolab/error.hpp"

namespace spectrolab {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_domain: return "InvalidDomain";
    case ErrorKind::non_simple_polygon: return "NonSimplePolygon";
    case ErrorKind::not_convex: return "NotConvex";
    case ErrorKind::degenerate_domain: return "DegenerateDomain";
    case ErrorKind::empty_grid: return "EmptyGrid";
    case ErrorKind::spacing_too_coarse: return "SpacingTooCoarse";
    case ErrorKind::hardy_unknown: return "HardyUnknown";
    case ErrorKind::field_too_strong_for_grid: return "FieldTooStrongForGrid";
    case ErrorKind::not_converged: return "NotConverged";
    case ErrorKind::dimension_too_large_for_dense: return "DimensionTooLargeForDense";
    case ErrorKind::invalid_gamma: return "InvalidGamma";
    case ErrorKind::spectrum_truncated: return "SpectrumTruncated";
    case ErrorKind::missing_functionals: return "MissingFunctionals";
    case ErrorKind::unknown_kind: return "UnknownKind";
    case ErrorKind::invalid_argument: return "InvalidArgument";
    case ErrorKind::io: return "IOError";
  }
  return "Error";
}

}  // namespace spectrolab
