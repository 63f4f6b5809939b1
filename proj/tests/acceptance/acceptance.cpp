// One line per acceptance criterion: PASS or FAIL, a short description and
// the numbers behind the verdict. Exit status 1 when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "spectrolab/error.hpp"
#include "spectrolab/harness.hpp"

using namespace spectrolab;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kJ01 = 2.404825557695773;

struct Outcome {
  bool ok = false;
  std::string detail;
};

std::string fmt(double v, int digits = 6) {
  std::ostringstream ss;
  ss.precision(digits);
  ss << v;
  return ss.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool pass_or_indeterminate(Verdict v) { return v == Verdict::pass || v == Verdict::indeterminate || v == Verdict::report; }

double lambda1_fd(const DomainSpec& d, double h) {
  SolverOptions o;
  o.tol = 1e-10;
  return lowest_eigenpairs(assemble_dirichlet(rasterize(d, h)), 1, o).require_converged().eigenvalues[0];
}

// 1. Lattice oracle on the square, Bessel oracle on the disc.
Outcome analytic_oracle() {
  auto t0 = std::chrono::steady_clock::now();
  const double h = 1.0 / 65;
  const auto op = assemble_dirichlet(rasterize(DomainSpec::rectangle(1, 1), h));
  SolverOptions o;
  o.method = SolverMethod::iterative;
  const auto r = lowest_eigenpairs(op, 50, o).require_converged();
  const auto lattice = rectangle_lattice_eigenvalues(1, 1, h, 50);
  double worst = 0;
  for (int j = 0; j < 50; ++j) worst = std::max(worst, std::abs(r.eigenvalues[j] - lattice[j]) / lattice[j]);
  const double square_s = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  const std::vector<double> hs{1.0 / 64, 1.0 / 128, 1.0 / 256};
  std::vector<double> vs;
  for (double hh : hs) vs.push_back(lambda1_fd(DomainSpec::disc(1), hh));
  const double extrapolated = richardson_three_grid(vs, hs);
  const double rel = std::abs(extrapolated - kJ01 * kJ01) / (kJ01 * kJ01);
  const double disc_s = seconds_since(t0);

  Outcome out;
  out.ok = worst <= 1e-10 && rel <= 1e-3 && square_s < 30 && disc_s < 30;
  out.detail = "square worst rel " + fmt(worst, 3) + " (" + fmt(square_s, 3) + " s); disc lambda1 " +
               fmt(extrapolated, 8) + " vs " + fmt(kJ01 * kJ01, 8) + ", rel " + fmt(rel, 3) + " (" + fmt(disc_s, 3) +
               " s)";
  return out;
}

// 2. Li-Yau family.
Outcome liyau_family() {
  const std::vector<InequalityId> ids{InequalityId::liyau_classical, InequalityId::melas, InequalityId::liyau_improved,
                                      InequalityId::liyau_convex};
  double min_slack = std::numeric_limits<double>::infinity();
  int checked = 0;
  bool ok = true;
  for (const char* label : {"square", "rect-2x1", "rect-10x0.1"}) {
    const auto d = default_catalog().find(label);
    const auto f = compute_functionals(d);
    const auto s = analytic_spectrum(*analytic_eigenvalues(d, 2000));
    for (auto id : ids) {
      for (int N = 1; N <= 2000; ++N) {
        VerifyParams p;
        p.N = N;
        const auto rep = verify_inequality(id, s, &f, p);
        min_slack = std::min(min_slack, rep.slack);
        ok = ok && rep.slack >= 0.0;
        ++checked;
      }
    }
  }
  ExperimentPlan plan;
  plan.analytic = false;
  plan.grids = {1.0 / 64, 1.0 / 128};
  plan.N_max = 100;
  plan.Lambda_grid = {1.0, 1.0, 1};
  plan.inequalities = ids;
  int fd_rows = 0, indeterminate = 0;
  for (const char* label : {"disc", "L-shape", "pentagon"}) {
    const auto ev = evaluate_domain(default_catalog().find(label), 0.0, plan);
    ok = ok && ev.spectrum.estimate.source == SpectrumSource::extrapolated;
    for (const auto& r : ev.reports) {
      ++fd_rows;
      if (r.verdict == Verdict::indeterminate) ++indeterminate;
      ok = ok && pass_or_indeterminate(r.verdict);
    }
  }
  return {ok && fd_rows > 0, std::to_string(checked) + " analytic rows, min slack " + fmt(min_slack, 4) + "; " +
                                 std::to_string(fd_rows) + " extrapolated rows, " + std::to_string(indeterminate) +
                                 " indeterminate, 0 allowed fail"};
}

// 3. Improved vs Melas remainders.
Outcome improved_vs_melas() {
  bool ok = true;
  std::string detail;
  for (const auto& d : default_catalog().domains) {
    if (!is_convex(d)) continue;
    const auto f = compute_functionals(d);
    const double dim = f.dimension;
    const double lhs = 1.0 / (f.inradius * f.inradius);
    const double rhs = dim / (dim + 2) * f.volume / f.inertia;
    // The disc attains equality.
    ok = ok && lhs >= rhs * (1 - 1e-12);
    detail += d.label + " " + fmt(lhs / rhs, 4) + "; ";
  }
  const auto thin = compute_functionals(DomainSpec::rectangle(10, 0.1));
  const double ratio = (1.0 / (64 * thin.inradius * thin.inradius)) / (melas_constant(2) * thin.volume / thin.inertia);
  ok = ok && ratio > 10;
  return {ok, "ratios " + detail + "rect-10x0.1 remainder ratio " + fmt(ratio, 5)};
}

// 4. Magnetic bounds at h = 1/128.
Outcome magnetic_bounds() {
  ExperimentPlan plan;
  plan.grids = {1.0 / 128};
  plan.N_max = 50;
  plan.Lambda_grid = {1.0, 50.0, 50};
  plan.k_limit = 2000;
  bool ok = true;
  int rows = 0, indeterminate = 0;
  std::string dia;
  for (const char* label : {"square", "disc"}) {
    for (double field : {1.0, 5.0, 20.0}) {
      const auto ev = evaluate_domain(default_catalog().find(label), field, plan);
      double top = 0;
      for (const auto& r : ev.reports) {
        ++rows;
        if (r.verdict == Verdict::indeterminate) ++indeterminate;
        ok = ok && pass_or_indeterminate(r.verdict);
        if (r.parameter_kind == ParameterKind::Lambda) top = std::max(top, r.parameter);
        if (r.inequality_id == InequalityId::diamagnetic) {
          ok = ok && r.slack > 0.0 && r.verdict == Verdict::pass;
          dia += std::string(label) + "@" + fmt(field, 3) + " +" + fmt(r.slack, 3) + " ";
        }
      }
      const double l1 = ev.spectrum.estimate.eigenvalues.front();
      ok = ok && top >= 50 * l1 * (1 - 1e-12);
      ok = ok && ev.spectrum.estimate.size() >= 50;
    }
  }
  return {ok, std::to_string(rows) + " rows, " + std::to_string(indeterminate) + " indeterminate; diamagnetic " + dia};
}

// 5. Landau identity.
Outcome landau_identity() {
  bool ok = true;
  const auto a = landau_partial_sum(10, 1), b = landau_partial_sum(1, 1), c = landau_partial_sum(2.5, 1);
  ok = ok && a.partial_sum == 25 && a.direct_sum == 25 && b.partial_sum == 0 && b.direct_sum == 0 &&
       c.partial_sum == 1.5 && c.direct_sum == 1.5;
  std::mt19937_64 rng(20);
  std::uniform_real_distribution<double> lam(0, 1000), field(0.01, 100);
  double worst = 0;
  for (int t = 0; t < 10000; ++t) {
    const auto r = landau_partial_sum(lam(rng), field(rng));
    if (r.direct_sum == 0) {
      ok = ok && r.partial_sum == 0;
      continue;
    }
    worst = std::max(worst, std::abs(r.partial_sum - r.direct_sum) / std::abs(r.direct_sum));
  }
  ok = ok && worst < 1e-13;
  return {ok, "worked values exact; worst relative difference " + fmt(worst, 3) + " over 10^4 pairs"};
}

// 6. Legendre duality.
Outcome legendre() {
  std::vector<int> samples;
  for (int n = 1; n <= 50; ++n) samples.push_back(n);
  bool ok = true;
  double worst = 0;
  for (const auto& d : default_catalog().domains) {
    const auto f = compute_functionals(d);
    for (auto pairing : {LegendrePairing::dirichlet, LegendrePairing::magnetic}) {
      const auto rep = legendre_duality_check(f, samples, pairing);
      ok = ok && rep.verdict == Verdict::pass;
      worst = std::max(worst, 1e-9 - rep.slack);
    }
  }
  return {ok, "worst relative difference " + fmt(worst, 3) + " (limit 1e-9), both pairings, 6 domains"};
}

// 7. Geometry identities.
Outcome geometry_identities() {
  bool ok = true;
  double worst = 0;
  for (const auto& d : default_catalog().domains) {
    if (!is_convex(d)) continue;
    const double gap = sigma_convex_identity_gap(d);
    worst = std::max(worst, gap);
    ok = ok && gap <= 1e-3;
  }
  const auto sq = compute_functionals(DomainSpec::rectangle(1, 1));
  const double e_sigma = std::abs(sq.sigma - 2), e_i = std::abs(sq.inertia - 1.0 / 6), e_r = std::abs(sq.inradius - 0.5);
  ok = ok && e_sigma <= 1e-6 && e_i <= 1e-6 && e_r <= 1e-6;
  return {ok, "worst sigma gap " + fmt(worst, 3) + "; square errors sigma " + fmt(e_sigma, 3) + ", I " + fmt(e_i, 3) +
                  ", R_i " + fmt(e_r, 3)};
}

// 8. Two-term Weyl trend.
Outcome weyl_trend() {
  bool ok = true;
  std::string detail;
  for (const char* label : {"square", "rect-2x1", "rect-10x0.1"}) {
    const auto d = default_catalog().find(label);
    const auto f = compute_functionals(d);
    // A thin rectangle is quasi one-dimensional until many transverse modes
    // fit, so the window starts at 100 times the aspect ratio.
    const int n_lo = static_cast<int>(100 * std::max(d.width, d.height) / std::min(d.width, d.height));
    const int n_hi = 20 * n_lo;
    const auto fit = weyl_secondterm_fit(*analytic_eigenvalues(d, n_hi), f, n_lo, n_hi);
    ok = ok && fit.coefficient > 0 && fit.windows.size() >= 2;
    for (std::size_t i = 1; i < fit.windows.size(); ++i) {
      ok = ok && fit.windows[i].residual_ratio < fit.windows[i - 1].residual_ratio;
    }
    detail += std::string(label) + " N " + std::to_string(n_lo) + ".." + std::to_string(n_hi) + " c=" +
              fmt(fit.coefficient, 4) + " ratios";
    for (const auto& w : fit.windows) detail += " " + fmt(w.residual_ratio, 2);
    detail += "; ";
  }
  return {ok, detail};
}

// 9. Gauge invariance.
Outcome gauge_invariance() {
  bool ok = true;
  double worst_shift = 0, worst_flux = 0;
  for (const char* label : {"square", "disc", "L-shape", "pentagon"}) {
    const double h = 1.0 / 32, field = 10;
    const auto g = rasterize(default_catalog().find(label), h);
    const auto op = assemble_magnetic(g, field);
    const auto t = gauge_transform(op, g, [&](const Point& x) { return x[0] * x[1] * field / 2; }, "landau");
    SolverOptions o;
    o.tol = 1e-12;
    const auto a = lowest_eigenpairs(op, 10, o).require_converged();
    const auto b = lowest_eigenpairs(t, 10, o).require_converged();
    for (int j = 0; j < 10; ++j) {
      worst_shift = std::max(worst_shift, std::abs(a.eigenvalues[j] - b.eigenvalues[j]) / a.eigenvalues[j]);
    }
    const Complex expected = std::polar(1.0, -field * h * h);
    for (const auto& fl : plaquette_fluxes(op, g)) worst_flux = std::max(worst_flux, std::abs(fl - expected));
    for (const auto& fl : plaquette_fluxes(t, g)) worst_flux = std::max(worst_flux, std::abs(fl - expected));
  }
  ok = worst_shift < 1e-8 && worst_flux < 1e-13;
  return {ok, "worst eigenvalue shift " + fmt(worst_shift, 3) + ", worst flux deviation " + fmt(worst_flux, 3)};
}

// 10. Sweep determinism.
Outcome determinism() {
  auto plan = load_plan(std::string(SPECTROLAB_DATA_DIR) + "/quick_plan.json");
  const fs::path base = fs::temp_directory_path() / "spectrolab_acceptance_determinism";
  fs::remove_all(base);
  plan.output_dir = (base / "first").string();
  run(plan, 1);
  plan.output_dir = (base / "second").string();
  run(plan, 2);
  const auto a = slurp(base / "first" / "report.csv");
  const auto b = slurp(base / "second" / "report.csv");
  const bool ok = !a.empty() && a == b;
  const auto lines = std::count(a.begin(), a.end(), '\n');
  fs::remove_all(base);
  return {ok, "report.csv " + std::to_string(a.size()) + " bytes, " + std::to_string(lines) + " lines, " +
                  (ok ? "identical" : "different")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"analytic-spectrum oracle", analytic_oracle},
      {"Li-Yau family", liyau_family},
      {"improved vs Melas remainder", improved_vs_melas},
      {"magnetic bounds", magnetic_bounds},
      {"Landau identity", landau_identity},
      {"Legendre duality", legendre},
      {"geometry identities", geometry_identities},
      {"two-term Weyl trend", weyl_trend},
      {"gauge invariance", gauge_invariance},
      {"sweep determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    if (!out.ok) ++failed;
    std::printf("%s %zu %s: %s [%.1f s]\n", out.ok ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                out.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
