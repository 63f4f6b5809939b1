#pragma once

#include <string>
#include <string_view>

namespace spectrolab {

enum class InequalityId {
  weyl_leading,
  berezin,
  berezin_excess,
  liyau_classical,
  melas,
  liyau_improved,
  liyau_convex,
  magnetic_liyau,
  magnetic_convex,
  berezin_improved,
  magnetic_berezin_improved,
  davies_improved,
  davies_convex,
  davies_boundary,
  lambda1_hardy,
  diamagnetic,
  landau_identity,
  legendre_duality,
  weyl_secondterm_sign,
};

std::string_view to_string(InequalityId id);
InequalityId inequality_from_string(std::string_view name);

/// `report` marks rows that are evaluated but carry no claim to check.
enum class Verdict { pass, fail, indeterminate, report };

std::string_view to_string(Verdict v);

enum class ParameterKind { none, N, Lambda, beta };

/// One evaluated inequality. slack = lhs - rhs for lower bounds and
/// rhs - lhs for upper bounds, so slack >= 0 always means "holds".
struct BoundReport {
  InequalityId inequality_id = InequalityId::berezin;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  double tolerance_budget = 0.0;
  Verdict verdict = Verdict::report;
  ParameterKind parameter_kind = ParameterKind::none;
  double parameter = 0.0;
  double field = 0.0;
  double gamma = 0.0;
  double spacing = 0.0;  // 0 for analytic spectra
  std::string domain;
};

/// pass iff slack >= 0; fail iff slack < -budget; indeterminate otherwise.
Verdict classify(double slack, double budget);

}  // namespace spectrolab
