#pragma once

// Closed-form right-hand sides of the eigenvalue-sum and Riesz-mean bounds,
// the Landau-level counting identity, numeric Legendre transforms, and the
// verification of a bound against a computed spectrum.

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "spectrolab/bounds_report.hpp"
#include "spectrolab/geometry.hpp"
#include "spectrolab/spectra.hpp"

namespace spectrolab {

/// L^cl_{gamma,d} = Gamma(gamma+1) / ((4 pi)^{d/2} Gamma(gamma+1+d/2)).
double semiclassical_constant(double gamma, int d);

/// The gamma = 1 constant in its second closed form 1/(2^d pi^{d/2} Gamma(2+d/2)).
double semiclassical_constant_gamma1(int d);

/// C_d = 4 pi d/(d+2) Gamma(d/2+1)^{2/d}.
double liyau_constant(int d);

/// M_d = 1/(24(d+2)), the weakest admissible value.
double melas_constant(int d);

/// K = (2+mu)/(16 pi mu) (2+2mu)^{-(2+3mu)/(2+mu)}.
double davies_constant(double mu);

/// Exponent (3+mu)/(2+mu) of Lambda in the Davies remainder.
double davies_exponent(double mu);

enum class LiYauVariant { classical, melas, improved, convex };
enum class MagneticVariant { improved, convex };
enum class BerezinVariant { berezin, excess, improved, magnetic_improved, davies_improved, davies_convex };

/// Lower bound on sum_{j<=N} lambda_j. Throws not_convex for the convex
/// variant on a non-convex domain.
double liyau_rhs(int N, const GeometricFunctionals& f, int d, LiYauVariant variant);
double liyau_rhs(int N, const GeometricFunctionals& f, LiYauVariant variant);

/// 2 pi N^2/|Omega| plus the improved or convex remainder; planar only.
double magnetic_liyau_rhs(int N, const GeometricFunctionals& f, MagneticVariant variant);

/// Upper bound on sum (Lambda - lambda_k)_+^gamma. The improved, magnetic
/// and Davies variants are gamma = 1 statements and ignore `gamma` beyond
/// the sign check. Throws invalid_gamma for gamma < 0.
double berezin_rhs(double Lambda, double gamma, const GeometricFunctionals& f, BerezinVariant variant,
                   double field = 0.0);

struct LandauCount {
  double Lambda = 0.0;
  double B = 0.0;
  long M = 0;         // floor(Lambda/2B + 1/2)
  double m = 0.0;     // fractional part, in [0,1)
  double partial_sum = 0.0;  // closed form M Lambda - B M^2
  double direct_sum = 0.0;   // sum over Landau levels B(2k-1) < Lambda
};

/// Throws invalid_argument unless B > 0 and Lambda >= 0.
LandauCount landau_partial_sum(double Lambda, double B);

/// sum (Lambda - lambda_k)_+^gamma over the list; gamma = 0 counts
/// eigenvalues strictly below Lambda. Throws spectrum_truncated when the
/// largest eigenvalue is below Lambda and invalid_gamma for gamma < 0.
double riesz_mean(std::span<const double> eigenvalues, double Lambda, double gamma);

struct LegendreValue {
  double value = 0.0;   // sup_x (slope x - f(x))
  double argmax = 0.0;
};

/// sup over x in [lo, hi] of slope*x - f(x): a log-spaced grid, widened
/// while the maximum sits on an edge, then golden-section refinement.
LegendreValue legendre_transform(const std::function<double(double)>& f, double slope, double lo, double hi);

enum class LegendrePairing { dirichlet, magnetic };

/// Transforms the shifted power L|Omega|(Lambda - s)^{1+d/2} (dirichlet) or
/// |Omega|(Lambda - s)^2/8pi (magnetic), s = sigma^2/(16 c_h |Omega|^2), at
/// each slope N and compares with the closed-form sum bound. slack is
/// 1e-9 minus the worst relative difference.
BoundReport legendre_duality_check(const GeometricFunctionals& f, std::span<const int> N_samples,
                                   LegendrePairing pairing = LegendrePairing::dirichlet);

/// Numeric transform of the Riesz-mean bound itself (no shift), d = 2.
/// Exposed to quantify how far it falls from the sum bound.
double legendre_of_berezin_improved(const GeometricFunctionals& f, int N);

struct WeylWindow {
  int N_lo = 0;
  int N_hi = 0;  // exclusive
  double coefficient = 0.0;
  double residual_ratio = 0.0;  // rms(r - c x) / mean(x)
};

struct WeylFit {
  double coefficient = 0.0;  // least squares c in r ~ c N^{1+1/d}
  double normalized = 0.0;   // coefficient / (|dOmega| / |Omega|^{1+1/d})
  std::vector<WeylWindow> windows;  // dyadic windows starting at N_lo
};

/// Fits sum_{j<=N} lambda_j - C_d |Omega|^{-2/d} N^{1+2/d} against
/// N^{1+1/d} for N in [N_lo, N_hi].
WeylFit weyl_secondterm_fit(std::span<const double> eigenvalues, const GeometricFunctionals& f, int N_lo, int N_hi);

struct VerifyParams {
  int N = 1;
  double Lambda = 0.0;
  double gamma = 1.0;
  double field = 0.0;
  std::string domain;
  int N_lo = 100;  // weyl fit window start
  /// Zero-field ground state on the same grid (diamagnetic check).
  std::optional<double> reference_lambda1;
  double reference_tolerance = 0.0;
  std::vector<int> legendre_samples;  // empty selects 1..50
};

/// Whether the inequality makes a claim for this dimension, convexity and
/// field; inapplicable combinations are skipped by the harness.
bool applicable(InequalityId id, const GeometricFunctionals& f, double field);

/// Evaluates one inequality. LHS from the spectrum, RHS from the closed
/// forms, budget from the per-eigenvalue bias plus the solver tolerance and
/// the sigma quadrature error. Throws spectrum_truncated, missing_functionals
/// (null functionals where needed), invalid_argument for inapplicable ids.
BoundReport verify_inequality(InequalityId id, const SpectrumEstimate& spectrum, const GeometricFunctionals* f,
                              const VerifyParams& params);

}  // namespace spectrolab
