#pragma once

// Lowest eigenpairs of sparse Hermitian positive semidefinite matrices,
// dense spectral calculus for fractional powers, and the discrete check of
// the Davies boundary-layer inequality.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "spectrolab/bounds_report.hpp"
#include "spectrolab/geometry.hpp"
#include "spectrolab/operators.hpp"

namespace spectrolab {

using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

enum class SolverMethod { automatic, iterative, dense };

struct SolverOptions {
  double tol = 1e-8;  // residual bound relative to the operator norm estimate
  int max_iterations = 5000;
  std::uint64_t seed = 0x5eed;
  int block_size = 0;  // Lanczos block width; 0 selects 8
  int slice_size = 0;  // eigenvalues per spectral slice; 0 picks from k, at most 48
  SolverMethod method = SolverMethod::automatic;
  bool keep_vectors = false;
  // When positive, keep going past k until the last eigenvalue returned is
  // at least cover_multiple * lambda_1, but never past k_limit (0: dimension).
  double cover_multiple = 0.0;
  int k_limit = 0;
};

struct SpectralResult {
  std::vector<double> eigenvalues;  // nondecreasing
  std::vector<double> residuals;    // ||M v - lambda v|| / ||v||
  int k_requested = 0;
  int k_converged = 0;
  double field = 0.0;
  double grid_spacing = 0.0;
  int iterations = 0;
  double tolerance = 0.0;  // absolute residual bound applied
  double norm_estimate = 0.0;
  bool converged = false;
  ComplexMatrix vectors;  // columns; empty unless keep_vectors

  /// Throws not_converged when the solve stopped early.
  const SpectralResult& require_converged() const;
  /// Number of eigenvalues strictly below lambda.
  int count_below(double lambda) const;
};

/// The k smallest eigenpairs. The spectrum is cut into slices from zero
/// upwards; each slice runs shift-invert block Lanczos with full
/// reorthogonalisation and is certified by the LDL^T inertia at its upper
/// edge, so no eigenvalue below the last one returned can be missed. Dense
/// diagonalisation for small problems. Deterministic for a fixed seed.
SpectralResult lowest_eigenpairs(const LinearOperatorMatrix& op, int k, const SolverOptions& options = {});

/// Full dense spectrum (ascending) of the operator.
SpectralResult dense_spectrum(const LinearOperatorMatrix& op, bool keep_vectors = false);

/// Dense eigendecomposition reused across fractional powers.
class SpectralDecomposition {
 public:
  static constexpr Eigen::Index kMaxDenseDimension = 4000;

  /// Throws dimension_too_large_for_dense above kMaxDenseDimension.
  explicit SpectralDecomposition(const LinearOperatorMatrix& op);

  /// M^exponent v; negative roundoff eigenvalues are clamped to zero.
  ComplexVector apply_power(double exponent, const ComplexVector& v) const;

  const Eigen::VectorXd& eigenvalues() const { return values_; }
  const ComplexMatrix& eigenvectors() const { return vectors_; }

 private:
  Eigen::VectorXd values_;
  ComplexMatrix vectors_;
};

/// exponent in (0, 1]; exponent = 1 is the plain matrix-vector product.
ComplexVector fractional_apply(const LinearOperatorMatrix& op, double exponent, const ComplexVector& v);

/// int_{delta < beta} |u|^2 against c^{2+2/c} beta^{2+2/c} ||H u|| ||H^{1/c} u||
/// in the discrete L^2 normalisation (h^d weights).
BoundReport davies_inequality_check(const SpectralDecomposition& decomposition, const LinearOperatorMatrix& op,
                                    const GridDomain& grid, double c, double beta, const ComplexVector& u);
BoundReport davies_inequality_check(const LinearOperatorMatrix& op, const GridDomain& grid, double c, double beta,
                                    const ComplexVector& u);

}  // namespace spectrolab
