#include "spectrolab/operators.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>

#include "spectrolab/error.hpp"

namespace spectrolab {

namespace {

using Triplet = Eigen::Triplet<Complex>;

LinearOperatorMatrix assemble(const GridDomain& grid, double field) {
  const double h = grid.spacing;
  const double inv_h2 = 1.0 / (h * h);
  const auto n = static_cast<Eigen::Index>(grid.point_count());

  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(n) * (2 * grid.dim + 1));
  for (Eigen::Index row = 0; row < n; ++row) {
    const auto& ijk = grid.lattice[static_cast<std::size_t>(row)];
    const Point x = grid.coordinates(static_cast<std::size_t>(row));
    triplets.emplace_back(row, row, Complex(2.0 * grid.dim * inv_h2, 0.0));
    for (int axis = 0; axis < grid.dim; ++axis) {
      for (const int step : {-1, 1}) {
        auto nb = ijk;
        nb[axis] += step;
        const std::int32_t col = grid.index_of(nb);
        if (col < 0) continue;
        Complex hop(-inv_h2, 0.0);
        if (field != 0.0) {
          // Forward hops carry exp(-i theta); backward hops the conjugate.
          const double theta =
              step > 0 ? link_phase_angle(x, axis, h, field) : -link_phase_angle(grid.coordinates(col), axis, h, field);
          hop = -inv_h2 * Complex(std::cos(theta), -std::sin(theta));
        }
        triplets.emplace_back(row, col, hop);
      }
    }
  }
  LinearOperatorMatrix op;
  op.entries.resize(n, n);
  op.entries.setFromTriplets(triplets.begin(), triplets.end());
  op.entries.makeCompressed();
  op.spacing = h;
  op.field = field;
  op.dim = grid.dim;
  return op;
}

}  // namespace

bool LinearOperatorMatrix::is_real() const {
  for (Eigen::Index k = 0; k < entries.outerSize(); ++k) {
    for (SparseComplex::InnerIterator it(entries, k); it; ++it) {
      if (it.value().imag() != 0.0) return false;
    }
  }
  return true;
}

SparseReal LinearOperatorMatrix::real_part() const { return entries.real(); }

double LinearOperatorMatrix::norm_estimate() const {
  double best = 0.0;
  for (Eigen::Index k = 0; k < entries.outerSize(); ++k) {
    double sum = 0.0;
    for (SparseComplex::InnerIterator it(entries, k); it; ++it) sum += std::abs(it.value());
    best = std::max(best, sum);
  }
  return best;
}

double link_phase_angle(const Point& x, int axis, double h, double field) {
  // A = (B/2)(-y, x); midpoint rule, exact for linear A.
  if (axis == 0) return -0.5 * field * x[1] * h;
  if (axis == 1) return 0.5 * field * x[0] * h;
  return 0.0;
}

LinearOperatorMatrix assemble_dirichlet(const GridDomain& grid) {
  if (grid.point_count() == 0) throw Error(ErrorKind::empty_grid, "cannot assemble on an empty grid");
  return assemble(grid, 0.0);
}

LinearOperatorMatrix assemble_magnetic(const GridDomain& grid, double field) {
  if (grid.point_count() == 0) throw Error(ErrorKind::empty_grid, "cannot assemble on an empty grid");
  if (grid.dim != 2) throw Error(ErrorKind::invalid_argument, "magnetic operators are planar only");
  const double h = grid.spacing;
  if (std::abs(field) * h * h >= 0.5) {
    throw Error(ErrorKind::field_too_strong_for_grid,
                "|B| h^2 = " + std::to_string(std::abs(field) * h * h) + " must stay below 0.5");
  }
  return assemble(grid, field);
}

LinearOperatorMatrix gauge_transform(const LinearOperatorMatrix& op, std::span<const double> chi,
                                     std::string tag) {
  if (static_cast<Eigen::Index>(chi.size()) != op.dimension()) {
    throw Error(ErrorKind::invalid_argument, "gauge function size does not match the operator");
  }
  LinearOperatorMatrix out = op;
  for (Eigen::Index row = 0; row < out.entries.outerSize(); ++row) {
    for (SparseComplex::InnerIterator it(out.entries, row); it; ++it) {
      const Eigen::Index col = it.col();
      if (col == row) continue;
      // Phase difference computed once per unordered pair keeps the stored
      // matrix exactly Hermitian.
      const double lo = chi[static_cast<std::size_t>(std::min(row, col))];
      const double hi = chi[static_cast<std::size_t>(std::max(row, col))];
      const double d = row < col ? lo - hi : hi - lo;
      it.valueRef() *= Complex(std::cos(d), std::sin(d));
    }
  }
  // Exact Hermitian symmetry: mirror the lower triangle from the upper one.
  for (Eigen::Index row = 0; row < out.entries.outerSize(); ++row) {
    for (SparseComplex::InnerIterator it(out.entries, row); it; ++it) {
      if (it.col() < row) it.valueRef() = std::conj(out.entries.coeff(it.col(), row));
    }
  }
  out.gauge_tag = std::move(tag);
  return out;
}

LinearOperatorMatrix gauge_transform(const LinearOperatorMatrix& op, const GridDomain& grid,
                                     const std::function<double(const Point&)>& chi, std::string tag) {
  std::vector<double> values(grid.point_count());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = chi(grid.coordinates(i));
  return gauge_transform(op, values, std::move(tag));
}

std::vector<Complex> plaquette_fluxes(const LinearOperatorMatrix& op, const GridDomain& grid) {
  std::vector<Complex> out;
  if (grid.dim != 2) return out;
  const double h2 = op.spacing * op.spacing;
  auto hop = [&](std::int32_t a, std::int32_t b) { return -h2 * op.entries.coeff(a, b); };
  for (std::size_t p = 0; p < grid.point_count(); ++p) {
    const auto& ijk = grid.lattice[p];
    const std::int32_t a = static_cast<std::int32_t>(p);
    const std::int32_t b = grid.index_of({ijk[0] + 1, ijk[1], ijk[2]});
    const std::int32_t c = grid.index_of({ijk[0] + 1, ijk[1] + 1, ijk[2]});
    const std::int32_t d = grid.index_of({ijk[0], ijk[1] + 1, ijk[2]});
    if (b < 0 || c < 0 || d < 0) continue;
    // Row a, column b holds the factor for the hop a -> b.
    out.push_back(hop(a, b) * hop(b, c) * hop(c, d) * hop(d, a));
  }
  return out;
}

void write_coordinate_list(const LinearOperatorMatrix& op, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io, "cannot open '" + path + "' for writing");
  out << std::setprecision(17);
  for (Eigen::Index row = 0; row < op.entries.outerSize(); ++row) {
    for (SparseComplex::InnerIterator it(op.entries, row); it; ++it) {
      out << row << ' ' << it.col() << ' ' << it.value().real() << ' ' << it.value().imag() << '\n';
    }
  }
  if (!out) throw Error(ErrorKind::io, "write to '" + path + "' failed");
}

bool is_exactly_hermitian(const LinearOperatorMatrix& op) {
  for (Eigen::Index row = 0; row < op.entries.outerSize(); ++row) {
    for (SparseComplex::InnerIterator it(op.entries, row); it; ++it) {
      const Complex mirror = op.entries.coeff(it.col(), row);
      const Complex expect = std::conj(it.value());
      if (mirror.real() != expect.real() || mirror.imag() != expect.imag()) return false;
    }
  }
  return true;
}

}  // namespace spectrolab
