#include "spectrolab/bounds.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "spectrolab/error.hpp"

namespace spectrolab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLandauRelTol = 1e-13;
constexpr double kLegendreRelTol = 1e-9;

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorKind::missing_functionals, std::string("functional not available: ") + what);
  }
}

void require_gamma(double gamma) {
  if (!(gamma >= 0.0)) throw Error(ErrorKind::invalid_gamma, "gamma must be nonnegative");
}

void require_planar(const GeometricFunctionals& f) {
  if (f.dimension != 2) throw Error(ErrorKind::invalid_argument, "planar domains only");
}

void require_convex(const GeometricFunctionals& f) {
  if (!f.is_convex) throw Error(ErrorKind::not_convex, "bound needs a convex domain");
}

// sigma^2 / (16 c_h |Omega|^2), the shift shared by the improved bounds.
double improved_shift(const GeometricFunctionals& f) {
  require_positive(f.sigma, "sigma");
  require_positive(f.hardy, "hardy constant");
  require_positive(f.volume, "volume");
  return f.sigma * f.sigma / (16.0 * f.hardy * f.volume * f.volume);
}

// Neumaier summation.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) carry += (sum - t) + x;
    else carry += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + carry; }
};

}  // namespace

// ---------------------------------------------------------------------------
// Report helpers

std::string_view to_string(InequalityId id) {
  switch (id) {
    case InequalityId::weyl_leading: return "weyl_leading";
    case InequalityId::berezin: return "berezin";
    case InequalityId::berezin_excess: return "berezin_excess";
    case InequalityId::liyau_classical: return "liyau_classical";
    case InequalityId::melas: return "melas";
    case InequalityId::liyau_improved: return "liyau_improved";
    case InequalityId::liyau_convex: return "liyau_convex";
    case InequalityId::magnetic_liyau: return "magnetic_liyau";
    case InequalityId::magnetic_convex: return "magnetic_convex";
    case InequalityId::berezin_improved: return "berezin_improved";
    case InequalityId::magnetic_berezin_improved: return "magnetic_berezin_improved";
    case InequalityId::davies_improved: return "davies_improved";
    case InequalityId::davies_convex: return "davies_convex";
    case InequalityId::davies_boundary: return "davies_boundary";
    case InequalityId::lambda1_hardy: return "lambda1_hardy";
    case InequalityId::diamagnetic: return "diamagnetic";
    case InequalityId::landau_identity: return "landau_identity";
    case InequalityId::legendre_duality: return "legendre_duality";
    case InequalityId::weyl_secondterm_sign: return "weyl_secondterm_sign";
  }
  return "unknown";
}

InequalityId inequality_from_string(std::string_view name) {
  for (int i = 0; i <= static_cast<int>(InequalityId::weyl_secondterm_sign); ++i) {
    const auto id = static_cast<InequalityId>(i);
    if (to_string(id) == name) return id;
  }
  throw Error(ErrorKind::invalid_argument, "unknown inequality id: " + std::string(name));
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::indeterminate: return "indeterminate";
    case Verdict::report: return "report";
  }
  return "unknown";
}

Verdict classify(double slack, double budget) {
  if (slack >= 0.0) return Verdict::pass;
  if (slack < -budget) return Verdict::fail;
  return Verdict::indeterminate;
}

// ---------------------------------------------------------------------------
// Constants

double semiclassical_constant(double gamma, int d) {
  require_gamma(gamma);
  if (d < 1) throw Error(ErrorKind::invalid_argument, "dimension must be positive");
  const double half_d = 0.5 * d;
  // lgamma keeps large gamma finite.
  const double log_ratio = std::lgamma(gamma + 1.0) - std::lgamma(gamma + 1.0 + half_d);
  return std::exp(log_ratio) / std::pow(4.0 * kPi, half_d);
}

double semiclassical_constant_gamma1(int d) {
  if (d < 1) throw Error(ErrorKind::invalid_argument, "dimension must be positive");
  return 1.0 / (std::pow(2.0, d) * std::pow(kPi, 0.5 * d) * std::tgamma(2.0 + 0.5 * d));
}

double liyau_constant(int d) {
  if (d < 1) throw Error(ErrorKind::invalid_argument, "dimension must be positive");
  return 4.0 * kPi * d / (d + 2.0) * std::pow(std::tgamma(0.5 * d + 1.0), 2.0 / d);
}

double melas_constant(int d) { return 1.0 / (24.0 * (d + 2.0)); }

double davies_constant(double mu) {
  return (2.0 + mu) / (16.0 * kPi * mu) * std::pow(2.0 + 2.0 * mu, -(2.0 + 3.0 * mu) / (2.0 + mu));
}

double davies_exponent(double mu) { return (3.0 + mu) / (2.0 + mu); }

// ---------------------------------------------------------------------------
// Sum bounds

double liyau_rhs(int N, const GeometricFunctionals& f, int d, LiYauVariant variant) {
  if (N < 1) throw Error(ErrorKind::invalid_argument, "N must be at least 1");
  require_positive(f.volume, "volume");
  const double n = N;
  const double leading = liyau_constant(d) * std::pow(f.volume, -2.0 / d) * std::pow(n, 1.0 + 2.0 / d);
  switch (variant) {
    case LiYauVariant::classical:
      return leading;
    case LiYauVariant::melas:
      require_positive(f.inertia, "moment of inertia");
      return leading + melas_constant(d) * f.volume / f.inertia * n;
    case LiYauVariant::improved:
      return leading + improved_shift(f) * n;
    case LiYauVariant::convex:
      require_convex(f);
      require_positive(f.inradius, "inradius");
      return leading + n / (64.0 * f.inradius * f.inradius);
  }
  return leading;
}

double liyau_rhs(int N, const GeometricFunctionals& f, LiYauVariant variant) {
  return liyau_rhs(N, f, f.dimension, variant);
}

double magnetic_liyau_rhs(int N, const GeometricFunctionals& f, MagneticVariant variant) {
  if (N < 1) throw Error(ErrorKind::invalid_argument, "N must be at least 1");
  require_planar(f);
  require_positive(f.volume, "volume");
  const double n = N;
  const double leading = 2.0 * kPi * n * n / f.volume;
  if (variant == MagneticVariant::improved) return leading + improved_shift(f) * n;
  require_convex(f);
  require_positive(f.inradius, "inradius");
  return leading + n / (64.0 * f.inradius * f.inradius);
}

// ---------------------------------------------------------------------------
// Riesz-mean bounds

double berezin_rhs(double Lambda, double gamma, const GeometricFunctionals& f, BerezinVariant variant, double) {
  require_gamma(gamma);
  if (!(Lambda > 0.0)) throw Error(ErrorKind::invalid_argument, "Lambda must be positive");
  require_positive(f.volume, "volume");
  const int d = f.dimension;
  const double vol = f.volume;
  switch (variant) {
    case BerezinVariant::berezin:
      return semiclassical_constant(gamma, d) * vol * std::pow(Lambda, gamma + 0.5 * d);
    case BerezinVariant::excess: {
      const double factor = 2.0 * std::pow(gamma / (gamma + 1.0), gamma);
      return factor * semiclassical_constant(gamma, d) * vol * std::pow(Lambda, gamma + 0.5 * d);
    }
    case BerezinVariant::improved: {
      const double l1 = semiclassical_constant(1.0, d);
      require_positive(f.sigma, "sigma");
      require_positive(f.hardy, "hardy constant");
      return l1 * vol * std::pow(Lambda, 1.0 + 0.5 * d) -
             l1 / (16.0 * f.hardy) * f.sigma * f.sigma / vol * std::pow(Lambda, 0.5 * d);
    }
    case BerezinVariant::magnetic_improved:
      require_planar(f);
      require_positive(f.sigma, "sigma");
      require_positive(f.hardy, "hardy constant");
      return vol / (8.0 * kPi) * Lambda * Lambda - f.sigma * f.sigma / (128.0 * kPi * f.hardy * vol) * Lambda;
    case BerezinVariant::davies_improved: {
      require_planar(f);
      require_positive(f.sigma, "sigma");
      require_positive(f.hardy, "hardy constant");
      const double mu = std::sqrt(f.hardy);
      const double remainder = davies_constant(mu) * f.sigma * std::pow(f.sigma / vol, 2.0 / (2.0 + mu)) *
                               std::pow(Lambda, davies_exponent(mu));
      return vol / (8.0 * kPi) * Lambda * Lambda - remainder;
    }
    case BerezinVariant::davies_convex:
      require_planar(f);
      require_convex(f);
      require_positive(f.inradius, "inradius");
      return vol / (8.0 * kPi) * (Lambda * Lambda - std::pow(Lambda, 1.25) / (36.0 * std::pow(f.inradius, 1.5)));
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Landau levels

LandauCount landau_partial_sum(double Lambda, double B) {
  if (!(B > 0.0)) throw Error(ErrorKind::invalid_argument, "field must be positive");
  if (!(Lambda >= 0.0)) throw Error(ErrorKind::invalid_argument, "Lambda must be nonnegative");
  LandauCount c;
  c.Lambda = Lambda;
  c.B = B;
  const double x = Lambda / (2.0 * B) + 0.5;
  const double fl = std::floor(x);
  c.M = static_cast<long>(fl);
  c.m = x - fl;
  // M Lambda - B M^2 = M (Lambda - B M); fma keeps Lambda - B M correctly rounded.
  const double mm = static_cast<double>(c.M);
  c.partial_sum = mm * std::fma(-B, mm, Lambda);

  CompensatedSum direct;
  for (long k = 1;; ++k) {
    const double term = std::fma(-B, 2.0 * static_cast<double>(k) - 1.0, Lambda);
    if (!(term > 0.0)) break;
    direct.add(term);
  }
  c.direct_sum = direct.value();
  return c;
}

// ---------------------------------------------------------------------------
// Riesz means

double riesz_mean(std::span<const double> eigenvalues, double Lambda, double gamma) {
  require_gamma(gamma);
  if (eigenvalues.empty() || eigenvalues.back() < Lambda) {
    throw Error(ErrorKind::spectrum_truncated, "eigenvalue list does not reach Lambda");
  }
  CompensatedSum s;
  for (const double lam : eigenvalues) {
    if (lam < Lambda) s.add(gamma == 0.0 ? 1.0 : std::pow(Lambda - lam, gamma));
  }
  return s.value();
}

namespace {

// Riesz mean without the truncation check, for shifted eigenvalues.
double riesz_unchecked(std::span<const double> eigenvalues, std::span<const double> shift, double sign,
                       double Lambda, double gamma) {
  CompensatedSum s;
  for (std::size_t j = 0; j < eigenvalues.size(); ++j) {
    const double lam = eigenvalues[j] + sign * shift[j];
    if (lam < Lambda) s.add(gamma == 0.0 ? 1.0 : std::pow(Lambda - lam, gamma));
  }
  return s.value();
}

}  // namespace

// ---------------------------------------------------------------------------
// Legendre transform

LegendreValue legendre_transform(const std::function<double(double)>& f, double slope, double lo, double hi) {
  if (!(lo > 0.0) || !(hi > lo)) throw Error(ErrorKind::invalid_argument, "Legendre grid needs 0 < lo < hi");
  auto g = [&](double x) { return slope * x - f(x); };
  constexpr int kPoints = 2001;
  std::vector<double> xs(kPoints);
  int best = 0;
  for (int expand = 0; expand < 60; ++expand) {
    const double ratio = std::log(hi / lo);
    for (int i = 0; i < kPoints; ++i) xs[i] = lo * std::exp(ratio * i / (kPoints - 1));
    best = 0;
    double best_val = g(xs[0]);
    for (int i = 1; i < kPoints; ++i) {
      const double v = g(xs[i]);
      if (v > best_val) {
        best_val = v;
        best = i;
      }
    }
    if (best == kPoints - 1) hi *= 1e3;
    else if (best == 0 && lo > 1e-300) lo *= 1e-3;
    else break;
  }
  double a = xs[std::max(best - 1, 0)];
  double b = xs[std::min(best + 1, kPoints - 1)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double gc = g(c);
  double gd = g(d);
  for (int it = 0; it < 300 && (b - a) > 1e-15 * std::abs(b); ++it) {
    if (gc > gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - inv_phi * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + inv_phi * (b - a);
      gd = g(d);
    }
  }
  LegendreValue out;
  out.argmax = 0.5 * (a + b);
  out.value = g(out.argmax);
  if (g(xs[best]) > out.value) {
    out.argmax = xs[best];
    out.value = g(xs[best]);
  }
  return out;
}

namespace {

double reference_eigenvalue(const GeometricFunctionals& f) {
  require_positive(f.inradius, "inradius");
  require_positive(f.hardy, "hardy constant");
  return 1.0 / (f.hardy * f.inradius * f.inradius);
}

}  // namespace

BoundReport legendre_duality_check(const GeometricFunctionals& f, std::span<const int> N_samples,
                                   LegendrePairing pairing) {
  const int d = f.dimension;
  if (pairing == LegendrePairing::magnetic) require_planar(f);
  const double s = improved_shift(f);
  const double vol = f.volume;
  const double power = 1.0 + 0.5 * d;
  const double l1 = semiclassical_constant(1.0, d);
  std::function<double(double)> riesz_bound;
  if (pairing == LegendrePairing::dirichlet) {
    riesz_bound = [=](double lam) { return l1 * vol * std::pow(std::max(lam - s, 0.0), power); };
  } else {
    riesz_bound = [=](double lam) {
      const double t = std::max(lam - s, 0.0);
      return vol / (8.0 * kPi) * t * t;
    };
  }
  const double lref = reference_eigenvalue(f);

  BoundReport rep;
  rep.inequality_id = InequalityId::legendre_duality;
  rep.parameter_kind = ParameterKind::N;
  rep.domain = f.label;
  double worst = -1.0;
  for (const int N : N_samples) {
    const auto t = legendre_transform(riesz_bound, static_cast<double>(N), s + 1e-4 * lref, s + 1e3 * lref);
    const double closed = pairing == LegendrePairing::dirichlet ? liyau_rhs(N, f, d, LiYauVariant::improved)
                                                                 : magnetic_liyau_rhs(N, f, MagneticVariant::improved);
    const double rel = std::abs(t.value - closed) / std::abs(closed);
    if (rel > worst) {
      worst = rel;
      rep.lhs = t.value;
      rep.rhs = closed;
      rep.parameter = N;
    }
  }
  rep.slack = kLegendreRelTol - worst;
  rep.tolerance_budget = 0.0;
  rep.verdict = classify(rep.slack, 0.0);
  return rep;
}

double legendre_of_berezin_improved(const GeometricFunctionals& f, int N) {
  require_planar(f);
  const double lref = reference_eigenvalue(f);
  auto bound = [&](double lam) { return berezin_rhs(lam, 1.0, f, BerezinVariant::improved); };
  return legendre_transform(bound, static_cast<double>(N), 1e-4 * lref, 1e3 * lref).value;
}

// ---------------------------------------------------------------------------
// Two-term Weyl fit

WeylFit weyl_secondterm_fit(std::span<const double> eigenvalues, const GeometricFunctionals& f, int N_lo, int N_hi) {
  if (N_lo < 1 || N_hi <= N_lo) throw Error(ErrorKind::invalid_argument, "Weyl fit needs 1 <= N_lo < N_hi");
  if (eigenvalues.size() < static_cast<std::size_t>(N_hi)) {
    throw Error(ErrorKind::spectrum_truncated, "Weyl fit needs N_hi eigenvalues");
  }
  require_positive(f.volume, "volume");
  require_positive(f.perimeter, "perimeter");
  const int d = f.dimension;
  const double lead = liyau_constant(d) * std::pow(f.volume, -2.0 / d);

  std::vector<double> x(static_cast<std::size_t>(N_hi) + 1, 0.0);
  std::vector<double> r(static_cast<std::size_t>(N_hi) + 1, 0.0);
  CompensatedSum partial;
  for (int n = 1; n <= N_hi; ++n) {
    partial.add(eigenvalues[static_cast<std::size_t>(n - 1)]);
    const double nn = n;
    x[n] = std::pow(nn, 1.0 + 1.0 / d);
    r[n] = partial.value() - lead * std::pow(nn, 1.0 + 2.0 / d);
  }
  auto fit = [&](int lo, int hi_incl) {
    double sxx = 0.0;
    double sxr = 0.0;
    for (int n = lo; n <= hi_incl; ++n) {
      sxx += x[n] * x[n];
      sxr += x[n] * r[n];
    }
    return sxr / sxx;
  };

  WeylFit out;
  out.coefficient = fit(N_lo, N_hi);
  out.normalized = out.coefficient / (f.perimeter / std::pow(f.volume, 1.0 + 1.0 / d));
  for (int lo = N_lo; lo < N_hi;) {
    const int hi = std::min(2 * lo, N_hi + 1);
    if (hi - lo < 2) break;
    WeylWindow w;
    w.N_lo = lo;
    w.N_hi = hi;
    w.coefficient = fit(lo, hi - 1);
    double ss = 0.0;
    double sx = 0.0;
    for (int n = lo; n < hi; ++n) {
      const double e = r[n] - w.coefficient * x[n];
      ss += e * e;
      sx += x[n];
    }
    const double count = hi - lo;
    w.residual_ratio = std::sqrt(ss / count) / (sx / count);
    out.windows.push_back(w);
    lo = hi;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Verification

bool applicable(InequalityId id, const GeometricFunctionals& f, double field) {
  const bool planar = f.dimension == 2;
  const bool magnetic = field != 0.0;
  if (magnetic && !planar) return false;
  switch (id) {
    case InequalityId::liyau_convex:
    case InequalityId::davies_convex:
    case InequalityId::magnetic_convex:
      if (!f.is_convex) return false;
      break;
    default:
      break;
  }
  switch (id) {
    case InequalityId::magnetic_liyau:
    case InequalityId::magnetic_convex:
    case InequalityId::magnetic_berezin_improved:
    case InequalityId::davies_improved:
    case InequalityId::davies_convex:
      return planar;
    case InequalityId::melas:
    case InequalityId::weyl_secondterm_sign:
    case InequalityId::berezin_excess:
      return !magnetic;
    case InequalityId::diamagnetic:
      return magnetic;
    case InequalityId::landau_identity:
      return magnetic;
    case InequalityId::davies_boundary:
      return false;  // needs eigenvectors; see davies_inequality_check
    default:
      return true;
  }
}

namespace {

bool is_sum_bound(InequalityId id) {
  switch (id) {
    case InequalityId::liyau_classical:
    case InequalityId::melas:
    case InequalityId::liyau_improved:
    case InequalityId::liyau_convex:
    case InequalityId::magnetic_liyau:
    case InequalityId::magnetic_convex:
      return true;
    default:
      return false;
  }
}

bool is_riesz_bound(InequalityId id) {
  switch (id) {
    case InequalityId::weyl_leading:
    case InequalityId::berezin:
    case InequalityId::berezin_excess:
    case InequalityId::berezin_improved:
    case InequalityId::magnetic_berezin_improved:
    case InequalityId::davies_improved:
    case InequalityId::davies_convex:
      return true;
    default:
      return false;
  }
}

double sum_rhs(InequalityId id, int N, const GeometricFunctionals& f) {
  switch (id) {
    case InequalityId::liyau_classical: return liyau_rhs(N, f, LiYauVariant::classical);
    case InequalityId::melas: return liyau_rhs(N, f, LiYauVariant::melas);
    case InequalityId::liyau_improved: return liyau_rhs(N, f, LiYauVariant::improved);
    case InequalityId::liyau_convex: return liyau_rhs(N, f, LiYauVariant::convex);
    case InequalityId::magnetic_liyau: return magnetic_liyau_rhs(N, f, MagneticVariant::improved);
    case InequalityId::magnetic_convex: return magnetic_liyau_rhs(N, f, MagneticVariant::convex);
    default: break;
  }
  throw Error(ErrorKind::invalid_argument, "not a sum bound");
}

BerezinVariant riesz_variant(InequalityId id) {
  switch (id) {
    case InequalityId::berezin_excess: return BerezinVariant::excess;
    case InequalityId::berezin_improved: return BerezinVariant::improved;
    case InequalityId::magnetic_berezin_improved: return BerezinVariant::magnetic_improved;
    case InequalityId::davies_improved: return BerezinVariant::davies_improved;
    case InequalityId::davies_convex: return BerezinVariant::davies_convex;
    default: return BerezinVariant::berezin;
  }
}

// Whether a Riesz-mean row carries a claim at this gamma and field.
bool riesz_claimed(InequalityId id, double gamma, double field) {
  const bool magnetic = field != 0.0;
  switch (id) {
    case InequalityId::weyl_leading:
      return false;
    case InequalityId::berezin:
      return magnetic ? gamma >= 1.5 : gamma >= 1.0;
    case InequalityId::berezin_excess:
      return !magnetic && gamma < 1.0;
    default:
      return true;
  }
}

// Change of the RHS when sigma moves by its quadrature error estimate.
template <class F>
double sigma_sensitivity(const GeometricFunctionals& f, F&& rhs) {
  if (!(f.sigma_error_estimate > 0.0)) return 0.0;
  GeometricFunctionals shifted = f;
  shifted.sigma = f.sigma + f.sigma_error_estimate;
  const double up = rhs(shifted);
  shifted.sigma = std::max(f.sigma - f.sigma_error_estimate, 0.0);
  const double down = shifted.sigma > 0.0 ? rhs(shifted) : up;
  const double base = rhs(f);
  return std::max(std::abs(up - base), std::abs(down - base));
}

const GeometricFunctionals& need(const GeometricFunctionals* f) {
  if (f == nullptr) throw Error(ErrorKind::missing_functionals, "geometric functionals are required");
  return *f;
}

}  // namespace

BoundReport verify_inequality(InequalityId id, const SpectrumEstimate& spectrum, const GeometricFunctionals* fp,
                              const VerifyParams& params) {
  BoundReport rep;
  rep.inequality_id = id;
  rep.field = params.field;
  rep.gamma = params.gamma;
  rep.spacing = spectrum.spacing;
  rep.domain = params.domain;
  if (spectrum.bias.size() != spectrum.eigenvalues.size()) {
    throw Error(ErrorKind::invalid_argument, "spectrum bias and eigenvalue lists differ in length");
  }

  if (is_sum_bound(id)) {
    const GeometricFunctionals& f = need(fp);
    const int N = params.N;
    if (N < 1) throw Error(ErrorKind::invalid_argument, "N must be at least 1");
    if (spectrum.size() < static_cast<std::size_t>(N)) {
      throw Error(ErrorKind::spectrum_truncated, "fewer than N eigenvalues supplied");
    }
    CompensatedSum lhs;
    CompensatedSum budget;
    for (int j = 0; j < N; ++j) {
      lhs.add(spectrum.eigenvalues[static_cast<std::size_t>(j)]);
      budget.add(spectrum.budget(static_cast<std::size_t>(j)));
    }
    rep.gamma = 1.0;
    rep.parameter_kind = ParameterKind::N;
    rep.parameter = N;
    rep.lhs = lhs.value();
    rep.rhs = sum_rhs(id, N, f);
    rep.slack = rep.lhs - rep.rhs;
    rep.tolerance_budget =
        budget.value() + sigma_sensitivity(f, [&](const GeometricFunctionals& g) { return sum_rhs(id, N, g); });
    const bool claimed = id != InequalityId::melas || params.field == 0.0;
    rep.verdict = claimed ? classify(rep.slack, rep.tolerance_budget) : Verdict::report;
    return rep;
  }

  if (is_riesz_bound(id)) {
    const GeometricFunctionals& f = need(fp);
    const double Lambda = params.Lambda;
    const BerezinVariant variant = riesz_variant(id);
    const bool gamma_one = variant != BerezinVariant::berezin && variant != BerezinVariant::excess;
    const double gamma = gamma_one ? 1.0 : params.gamma;
    if (gamma_one && !spectrum.eigenvalues.empty() && Lambda < spectrum.eigenvalues.front()) {
      throw Error(ErrorKind::invalid_argument, "bound needs Lambda >= lambda_1");
    }
    rep.gamma = gamma;
    rep.parameter_kind = ParameterKind::Lambda;
    rep.parameter = Lambda;
    rep.lhs = riesz_mean(spectrum.eigenvalues, Lambda, gamma);
    rep.rhs = berezin_rhs(Lambda, gamma, f, variant, params.field);
    rep.slack = rep.rhs - rep.lhs;
    std::vector<double> shift(spectrum.size());
    for (std::size_t j = 0; j < shift.size(); ++j) shift[j] = spectrum.budget(j);
    const double lower = riesz_unchecked(spectrum.eigenvalues, shift, +1.0, Lambda, gamma);
    const double upper = riesz_unchecked(spectrum.eigenvalues, shift, -1.0, Lambda, gamma);
    rep.tolerance_budget = std::max(upper - rep.lhs, rep.lhs - lower);
    if (variant != BerezinVariant::berezin && variant != BerezinVariant::excess &&
        variant != BerezinVariant::davies_convex) {
      rep.tolerance_budget += sigma_sensitivity(
          f, [&](const GeometricFunctionals& g) { return berezin_rhs(Lambda, gamma, g, variant, params.field); });
    }
    rep.verdict = riesz_claimed(id, gamma, params.field) ? classify(rep.slack, rep.tolerance_budget) : Verdict::report;
    return rep;
  }

  switch (id) {
    case InequalityId::lambda1_hardy: {
      const GeometricFunctionals& f = need(fp);
      if (spectrum.size() < 1) throw Error(ErrorKind::spectrum_truncated, "no eigenvalues supplied");
      rep.parameter_kind = ParameterKind::N;
      rep.parameter = 1;
      rep.lhs = spectrum.eigenvalues.front();
      rep.rhs = reference_eigenvalue(f);
      rep.slack = rep.lhs - rep.rhs;
      rep.tolerance_budget = spectrum.budget(0);
      rep.verdict = classify(rep.slack, rep.tolerance_budget);
      return rep;
    }
    case InequalityId::diamagnetic: {
      if (!params.reference_lambda1) {
        throw Error(ErrorKind::invalid_argument, "diamagnetic check needs the zero-field ground state");
      }
      if (spectrum.size() < 1) throw Error(ErrorKind::spectrum_truncated, "no eigenvalues supplied");
      rep.parameter_kind = ParameterKind::N;
      rep.parameter = 1;
      rep.lhs = spectrum.eigenvalues.front();
      rep.rhs = *params.reference_lambda1;
      rep.slack = rep.lhs - rep.rhs;
      // Both sides come from the same grid, so only solver error enters.
      rep.tolerance_budget = spectrum.solver_tolerance + params.reference_tolerance;
      rep.verdict = classify(rep.slack, rep.tolerance_budget);
      return rep;
    }
    case InequalityId::landau_identity: {
      const LandauCount c = landau_partial_sum(params.Lambda, params.field);
      rep.parameter_kind = ParameterKind::Lambda;
      rep.parameter = params.Lambda;
      rep.lhs = c.partial_sum;
      rep.rhs = c.direct_sum;
      rep.slack = kLandauRelTol * std::abs(c.direct_sum) - std::abs(c.partial_sum - c.direct_sum);
      rep.tolerance_budget = 0.0;
      rep.verdict = classify(rep.slack, 0.0);
      return rep;
    }
    case InequalityId::legendre_duality: {
      const GeometricFunctionals& f = need(fp);
      std::vector<int> samples = params.legendre_samples;
      if (samples.empty()) {
        for (int n = 1; n <= 50; ++n) samples.push_back(n);
      }
      BoundReport r = legendre_duality_check(
          f, samples, params.field != 0.0 ? LegendrePairing::magnetic : LegendrePairing::dirichlet);
      r.field = params.field;
      r.gamma = 1.0;
      r.spacing = 0.0;
      r.domain = params.domain.empty() ? f.label : params.domain;
      return r;
    }
    case InequalityId::weyl_secondterm_sign: {
      const GeometricFunctionals& f = need(fp);
      const int hi = params.N;
      const int lo = std::min(params.N_lo, std::max(1, hi / 2));
      const WeylFit fit = weyl_secondterm_fit(spectrum.eigenvalues, f, lo, hi);
      // The coefficient is linear in the partial sums.
      CompensatedSum partial;
      double sxx = 0.0;
      double sxb = 0.0;
      for (int n = 1; n <= hi; ++n) {
        partial.add(spectrum.budget(static_cast<std::size_t>(n - 1)));
        if (n < lo) continue;
        const double x = std::pow(static_cast<double>(n), 1.0 + 1.0 / f.dimension);
        sxx += x * x;
        sxb += x * partial.value();
      }
      rep.parameter_kind = ParameterKind::N;
      rep.parameter = hi;
      rep.lhs = fit.coefficient;
      rep.rhs = 0.0;
      rep.slack = fit.coefficient;
      rep.tolerance_budget = sxb / sxx;
      rep.verdict = classify(rep.slack, rep.tolerance_budget);
      return rep;
    }
    case InequalityId::davies_boundary:
      throw Error(ErrorKind::invalid_argument, "davies_boundary is evaluated from eigenvectors");
    default:
      break;
  }
  throw Error(ErrorKind::invalid_argument, "unsupported inequality id");
}

}  // namespace spectrolab
