#pragma once

// Finite-difference Dirichlet Laplacian and constant-field magnetic
// Laplacian (i grad + A)^2 in symmetric gauge, with Peierls link phases.

#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "spectrolab/geometry.hpp"

namespace spectrolab {

using Complex = std::complex<double>;
using SparseComplex = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;
using SparseReal = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct LinearOperatorMatrix {
  SparseComplex entries;  // compressed rows, Hermitian
  double spacing = 0.0;
  double field = 0.0;
  int dim = 2;
  std::optional<std::string> gauge_tag;

  Eigen::Index dimension() const { return entries.rows(); }
  /// True when every stored entry has zero imaginary part.
  bool is_real() const;
  SparseReal real_part() const;
  /// Upper bound on the spectral radius (max absolute row sum).
  double norm_estimate() const;
};

LinearOperatorMatrix assemble_dirichlet(const GridDomain& grid);

/// Throws field_too_strong_for_grid when |B| h^2 >= 0.5.
LinearOperatorMatrix assemble_magnetic(const GridDomain& grid, double field);

/// Conjugation by diag(exp(i chi(x))).
LinearOperatorMatrix gauge_transform(const LinearOperatorMatrix& op, std::span<const double> chi,
                                     std::string tag = "chi");
LinearOperatorMatrix gauge_transform(const LinearOperatorMatrix& op, const GridDomain& grid,
                                     const std::function<double(const Point&)>& chi, std::string tag = "chi");

/// Hop phase exp(-i theta) with theta the line integral of A along x -> x + h e_axis.
double link_phase_angle(const Point& x, int axis, double h, double field);

/// Product of the four normalised hop factors around every lattice plaquette
/// whose corners are all interior, traversed counter-clockwise.
std::vector<Complex> plaquette_fluxes(const LinearOperatorMatrix& op, const GridDomain& grid);

/// Coordinate-list text dump: "row col re im" per line, 0-based.
void write_coordinate_list(const LinearOperatorMatrix& op, const std::string& path);

/// Hermiticity as stored: entry(i,j) == conj(entry(j,i)) bit for bit.
bool is_exactly_hermitian(const LinearOperatorMatrix& op);

}  // namespace spectrolab
