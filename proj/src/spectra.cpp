#include "spectrolab/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <functional>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "spectrolab/error.hpp"

namespace spectrolab {

namespace {

constexpr double kPi = std::numbers::pi;

double bessel_j(int n, double x) { return std::cyl_bessel_j(static_cast<double>(n), x); }

// Zeros of J_n below `limit`, ascending.
std::vector<double> bessel_zeros_below(int n, double limit) {
  std::vector<double> zeros;
  // J_n has no positive zeros below n.
  double a = std::max(1e-3, static_cast<double>(n));
  double fa = bessel_j(n, a);
  constexpr double kStep = 0.1;  // zeros are about pi apart
  while (a < limit) {
    const double b = a + kStep;
    const double fb = bessel_j(n, b);
    if (fa == 0.0) {
      zeros.push_back(a);
    } else if ((fa < 0.0) != (fb < 0.0)) {
      double lo = a;
      double hi = b;
      double flo = fa;
      for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = bessel_j(n, mid);
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      const double root = 0.5 * (lo + hi);
      if (root < limit) zeros.push_back(root);
    }
    a = b;
    fa = fb;
  }
  return zeros;
}

std::vector<double> enumerate_below(const std::function<void(double, std::vector<double>&)>& fill, double start,
                                    std::size_t count) {
  double limit = start;
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::vector<double> values;
    fill(limit, values);
    if (values.size() >= count) {
      std::sort(values.begin(), values.end());
      values.resize(count);
      return values;
    }
    limit *= 1.5;
  }
  throw Error(ErrorKind::invalid_argument, "could not enumerate the requested number of eigenvalues");
}

}  // namespace

double bessel_zero(int n, int k) {
  if (n < 0 || k < 1) throw Error(ErrorKind::invalid_argument, "bessel_zero needs n >= 0 and k >= 1");
  // McMahon: j_{n,k} ~ (k + n/2 - 1/4) pi; the margin covers small k.
  double limit = (k + n / 2.0 + 1.0) * kPi + 10.0;
  while (true) {
    const auto zeros = bessel_zeros_below(n, limit);
    if (static_cast<int>(zeros.size()) >= k) return zeros[static_cast<std::size_t>(k - 1)];
    limit *= 1.5;
  }
}

std::vector<double> rectangle_eigenvalues(double a, double b, std::size_t count) {
  if (count == 0) return {};
  const double start = (4.0 * kPi * static_cast<double>(count) + 2.0 * (a + b) * 10.0) / (a * b) + kPi * kPi * (1.0 / (a * a) + 1.0 / (b * b));
  return enumerate_below(
      [&](double limit, std::vector<double>& out) {
        for (long m = 1;; ++m) {
          const double em = kPi * kPi * static_cast<double>(m * m) / (a * a);
          if (em + kPi * kPi / (b * b) > limit) break;
          for (long n = 1;; ++n) {
            const double e = em + kPi * kPi * static_cast<double>(n * n) / (b * b);
            if (e > limit) break;
            out.push_back(e);
          }
        }
      },
      start, count);
}

std::vector<double> disc_eigenvalues(double r, std::size_t count) {
  if (count == 0) return {};
  // Weyl: N(lambda) ~ r^2 lambda / 4, so j ~ 2 sqrt(N).
  const double start = 2.0 * std::sqrt(static_cast<double>(count)) + 10.0;
  auto js = enumerate_below(
      [](double limit, std::vector<double>& out) {
        for (int n = 0; static_cast<double>(n) < limit; ++n) {
          const auto zeros = bessel_zeros_below(n, limit);
          if (zeros.empty()) break;
          for (const double z : zeros) {
            out.push_back(z);
            if (n > 0) out.push_back(z);
          }
        }
      },
      start, count);
  for (double& j : js) j = j * j / (r * r);
  return js;
}

std::optional<std::vector<double>> analytic_eigenvalues(const DomainSpec& spec, std::size_t count) {
  switch (spec.kind) {
    case DomainKind::rectangle:
      return rectangle_eigenvalues(spec.width, spec.height, count);
    case DomainKind::disc:
      return disc_eigenvalues(spec.radius, count);
    case DomainKind::product: {
      const double len = spec.interval;
      // Every base eigenvalue below the cutoff combines with interval modes.
      std::size_t base_count = count;
      while (true) {
        auto base = analytic_eigenvalues(*spec.base, base_count);
        if (!base) return std::nullopt;
        std::vector<double> sums;
        const double cutoff = base->back();
        for (const double e : *base) {
          for (long l = 1;; ++l) {
            const double v = e + kPi * kPi * static_cast<double>(l * l) / (len * len);
            if (v > cutoff) break;
            sums.push_back(v);
          }
        }
        if (sums.size() >= count) {
          std::sort(sums.begin(), sums.end());
          sums.resize(count);
          return sums;
        }
        base_count *= 2;
      }
    }
    default:
      return std::nullopt;
  }
}

std::vector<double> rectangle_lattice_eigenvalues(double a, double b, double h, std::size_t count) {
  const long nx = std::lround(a / h) - 1;
  const long ny = std::lround(b / h) - 1;
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(nx * ny));
  for (long i = 1; i <= nx; ++i) {
    const double sx = std::sin(static_cast<double>(i) * kPi * h / (2.0 * a));
    for (long j = 1; j <= ny; ++j) {
      const double sy = std::sin(static_cast<double>(j) * kPi * h / (2.0 * b));
      values.push_back(4.0 / (h * h) * (sx * sx + sy * sy));
    }
  }
  std::sort(values.begin(), values.end());
  if (values.size() > count) values.resize(count);
  return values;
}

std::string to_string(SpectrumSource s) {
  switch (s) {
    case SpectrumSource::analytic: return "analytic";
    case SpectrumSource::finite_difference: return "finite-difference";
    case SpectrumSource::extrapolated: return "extrapolated";
  }
  return "unknown";
}

SpectrumEstimate analytic_spectrum(std::vector<double> eigenvalues, double field) {
  SpectrumEstimate s;
  s.bias.assign(eigenvalues.size(), 0.0);
  s.eigenvalues = std::move(eigenvalues);
  s.field = field;
  s.source = SpectrumSource::analytic;
  return s;
}

namespace {

double stencil_bias(double lambda, double h, bool aligned, double inradius) {
  double b = kStencilBiasConstant * h * h * lambda * lambda;
  if (!aligned) b += 2.0 * h * lambda / inradius;
  return b;
}

double max_residual(const SpectralResult& r) {
  double m = 0.0;
  for (const double x : r.residuals) m = std::max(m, x);
  return m;
}

}  // namespace

SpectrumEstimate finite_difference_spectrum(const SpectralResult& result, bool aligned, double inradius) {
  SpectrumEstimate s;
  s.eigenvalues = result.eigenvalues;
  s.bias.resize(s.eigenvalues.size());
  for (std::size_t j = 0; j < s.eigenvalues.size(); ++j) {
    s.bias[j] = stencil_bias(s.eigenvalues[j], result.grid_spacing, aligned, inradius);
  }
  // Hermitian residual bound: |lambda - theta| <= ||r||.
  s.solver_tolerance = max_residual(result);
  s.field = result.field;
  s.spacing = result.grid_spacing;
  s.source = SpectrumSource::finite_difference;
  return s;
}

double richardson_extrapolate(double coarse, double fine, double h_coarse, double h_fine, int order) {
  const double ratio = std::pow(h_coarse / h_fine, order);
  return fine + (fine - coarse) / (ratio - 1.0);
}

double richardson_three_grid(std::span<const double> values, std::span<const double> spacings) {
  if (values.size() != 3 || spacings.size() != 3) {
    throw Error(ErrorKind::invalid_argument, "three-grid extrapolation needs exactly three grids");
  }
  Eigen::Matrix3d m;
  Eigen::Vector3d rhs;
  for (int i = 0; i < 3; ++i) {
    m(i, 0) = 1.0;
    m(i, 1) = spacings[static_cast<std::size_t>(i)];
    m(i, 2) = spacings[static_cast<std::size_t>(i)] * spacings[static_cast<std::size_t>(i)];
    rhs(i) = values[static_cast<std::size_t>(i)];
  }
  return m.fullPivLu().solve(rhs)(0);
}

SpectrumEstimate richardson_spectrum(const SpectralResult& coarse, const SpectralResult& fine, bool aligned,
                                     double inradius, int order) {
  if (!(coarse.grid_spacing > fine.grid_spacing)) {
    throw Error(ErrorKind::invalid_argument, "Richardson extrapolation needs a coarse and a finer grid");
  }
  const std::size_t n = std::min(coarse.eigenvalues.size(), fine.eigenvalues.size());
  SpectrumEstimate s;
  s.eigenvalues.resize(n);
  s.bias.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double c = coarse.eigenvalues[j];
    const double f = fine.eigenvalues[j];
    s.eigenvalues[j] = richardson_extrapolate(c, f, coarse.grid_spacing, fine.grid_spacing, order);
    // The two-grid difference bounds the leftover error when the observed
    // order falls short of the model (boundary locking on curved edges).
    s.bias[j] = std::abs(f - c) + stencil_bias(f, fine.grid_spacing, true, inradius);
    if (!aligned) s.bias[j] += std::abs(f - c);
  }
  // Extrapolation can swap neighbours; keep each budget with its value.
  std::vector<std::size_t> order_idx(n);
  std::iota(order_idx.begin(), order_idx.end(), std::size_t{0});
  std::stable_sort(order_idx.begin(), order_idx.end(),
                   [&](std::size_t a, std::size_t b) { return s.eigenvalues[a] < s.eigenvalues[b]; });
  std::vector<double> values(n);
  std::vector<double> bias(n);
  for (std::size_t j = 0; j < n; ++j) {
    values[j] = s.eigenvalues[order_idx[j]];
    bias[j] = s.bias[order_idx[j]];
  }
  s.eigenvalues = std::move(values);
  s.bias = std::move(bias);
  s.solver_tolerance = std::max(max_residual(coarse), max_residual(fine));
  s.field = fine.field;
  s.spacing = fine.grid_spacing;
  s.source = SpectrumSource::extrapolated;
  return s;
}

bool grid_aligned(const DomainSpec& spec, double h) {
  auto on_lattice = [h](double v) { return std::abs(v / h - std::round(v / h)) < 1e-9; };
  switch (spec.kind) {
    case DomainKind::rectangle:
      return on_lattice(spec.width) && on_lattice(spec.height);
    case DomainKind::disc:
      return false;
    case DomainKind::convex_polygon:
    case DomainKind::polygon:
      for (std::size_t i = 0; i < spec.vertices.size(); ++i) {
        const Vec2& a = spec.vertices[i];
        const Vec2& b = spec.vertices[(i + 1) % spec.vertices.size()];
        if (!on_lattice(a.x) || !on_lattice(a.y)) return false;
        if (a.x != b.x && a.y != b.y) return false;
      }
      return true;
    case DomainKind::product:
      return grid_aligned(*spec.base, h) && on_lattice(spec.interval);
  }
  return false;
}

}  // namespace spectrolab
