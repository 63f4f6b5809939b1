#pragma once

// Reference spectra: closed forms for separable domains, Bessel zeros for
// discs, and the bias model that turns finite-difference eigenvalues into
// estimates with a tolerance budget.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spectrolab/eigensolver.hpp"
#include "spectrolab/geometry.hpp"

namespace spectrolab {

/// k-th positive zero (k >= 1) of the Bessel function J_n.
double bessel_zero(int n, int k);

/// Lowest `count` Dirichlet eigenvalues of (0,a)x(0,b), with multiplicity.
std::vector<double> rectangle_eigenvalues(double a, double b, std::size_t count);

/// Lowest `count` Dirichlet eigenvalues of the disc of radius r: j_{n,k}^2/r^2,
/// twice for n >= 1.
std::vector<double> disc_eigenvalues(double r, std::size_t count);

/// Closed-form spectrum when the domain is a rectangle, a disc, or a product
/// of an interval with one of them; nullopt otherwise.
std::optional<std::vector<double>> analytic_eigenvalues(const DomainSpec& spec, std::size_t count);

/// Closed-form eigenvalues (4/h^2)(sin^2(i pi h/2a') + ...) of the five-point
/// Laplacian on a rectangle whose sides are multiples of h.
std::vector<double> rectangle_lattice_eigenvalues(double a, double b, double h, std::size_t count);

enum class SpectrumSource { analytic, finite_difference, extrapolated };

std::string to_string(SpectrumSource s);

/// Eigenvalue estimates with a per-eigenvalue discretisation budget.
struct SpectrumEstimate {
  std::vector<double> eigenvalues;
  std::vector<double> bias;       // discretisation budget per eigenvalue
  double solver_tolerance = 0.0;  // absolute eigenvalue uncertainty from residuals
  double field = 0.0;
  double spacing = 0.0;  // finest grid used; 0 for analytic spectra
  SpectrumSource source = SpectrumSource::analytic;

  std::size_t size() const { return eigenvalues.size(); }
  double budget(std::size_t j) const { return bias[j] + solver_tolerance; }
};

/// Per-eigenvalue bias constant of the five-point stencil, C in C h^2 lambda^2.
/// Calibrated on the lattice error of rectangles: lambda - lambda_h <= h^2 lambda^2 / 12.
inline constexpr double kStencilBiasConstant = 1.0 / 12.0;

SpectrumEstimate analytic_spectrum(std::vector<double> eigenvalues, double field = 0.0);

/// `grid_aligned` is true when the boundary lies on lattice lines (axis
/// aligned rectangles); otherwise an O(h) boundary term 2 h lambda / R_i is
/// added to the budget.
SpectrumEstimate finite_difference_spectrum(const SpectralResult& result, bool grid_aligned, double inradius);

/// Two-grid Richardson extrapolation with error model c h^order, index by index.
SpectrumEstimate richardson_spectrum(const SpectralResult& coarse, const SpectralResult& fine, bool grid_aligned,
                                     double inradius, int order = 2);

double richardson_extrapolate(double coarse, double fine, double h_coarse, double h_fine, int order = 2);

/// Fits lambda(h) = lambda_0 + a h + b h^2 through three grids and returns lambda_0.
double richardson_three_grid(std::span<const double> values, std::span<const double> spacings);

/// Whether every boundary segment lies on lattice lines of spacing h.
bool grid_aligned(const DomainSpec& spec, double h);

}  // namespace spectrolab
