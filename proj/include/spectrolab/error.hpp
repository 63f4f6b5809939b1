#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spectrolab {

enum class ErrorKind {
  invalid_domain,
  non_simple_polygon,
  not_convex,
  degenerate_domain,
  empty_grid,
  spacing_too_coarse,
  hardy_unknown,
  field_too_strong_for_grid,
  not_converged,
  dimension_too_large_for_dense,
  invalid_gamma,
  spectrum_truncated,
  missing_functionals,
  unknown_kind,
  invalid_argument,
  io,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` tells callers which
/// contract was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace spectrolab
