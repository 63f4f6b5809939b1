#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "spectrolab/catalog.hpp"
#include "spectrolab/eigensolver.hpp"
#include "spectrolab/error.hpp"

using namespace spectrolab;

namespace {

const double pi = std::numbers::pi;

std::vector<double> lattice_values(int n, std::size_t count) {
  const double h = 1.0 / (n + 1);
  std::vector<double> out;
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) {
      const double si = std::sin(i * pi * h / 2), sj = std::sin(j * pi * h / 2);
      out.push_back(4.0 / (h * h) * (si * si + sj * sj));
    }
  }
  std::sort(out.begin(), out.end());
  out.resize(count);
  return out;
}

ComplexVector random_vector(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  ComplexVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(g(rng), g(rng));
  return v;
}

}  // namespace

TEST_SUITE("eigensolver") {
  TEST_CASE("square at h = 1/65 matches the lattice formula") {
    const auto op = assemble_dirichlet(rasterize(DomainSpec::rectangle(1, 1), 1.0 / 65));
    SolverOptions o;
    o.method = SolverMethod::iterative;
    const auto r = lowest_eigenpairs(op, 50, o).require_converged();
    const auto expected = lattice_values(64, 50);
    REQUIRE(r.eigenvalues.size() == 50);
    for (int j = 0; j < 50; ++j) CHECK(std::abs(r.eigenvalues[j] - expected[j]) / expected[j] < 1e-10);
    for (double res : r.residuals) CHECK(res <= r.tolerance);
    CHECK(std::is_sorted(r.eigenvalues.begin(), r.eigenvalues.end()));
  }

  TEST_CASE("dense fallback when k equals the dimension") {
    const auto op = assemble_magnetic(rasterize(default_catalog().find("L-shape"), 1.0 / 16), 3.0);
    const int n = static_cast<int>(op.dimension());
    const auto r = lowest_eigenpairs(op, n).require_converged();
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es{ComplexMatrix(op.entries)};
    REQUIRE(static_cast<int>(r.eigenvalues.size()) == n);
    for (int j = 0; j < n; ++j) CHECK(std::abs(r.eigenvalues[j] - es.eigenvalues()[j]) <= 1e-12 * es.eigenvalues()[n - 1]);
  }

  TEST_CASE("iterative and dense agree on a magnetic problem") {
    const auto op = assemble_magnetic(rasterize(default_catalog().find("pentagon"), 1.0 / 24), 10.0);
    SolverOptions o;
    o.method = SolverMethod::iterative;
    o.tol = 1e-10;
    const auto r = lowest_eigenpairs(op, 30, o).require_converged();
    const auto d = dense_spectrum(op);
    for (int j = 0; j < 30; ++j) CHECK(r.eigenvalues[j] == doctest::Approx(d.eigenvalues[j]).epsilon(1e-9));
  }

  TEST_CASE("square lambda_1 converges at second order") {
    std::vector<double> logs_h, logs_e;
    for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
      const auto r = lowest_eigenpairs(assemble_dirichlet(rasterize(DomainSpec::rectangle(1, 1), h)), 1);
      logs_h.push_back(std::log(h));
      logs_e.push_back(std::log(std::abs(2 * pi * pi - r.require_converged().eigenvalues[0])));
    }
    const double mx = (logs_h[0] + logs_h[1] + logs_h[2]) / 3, my = (logs_e[0] + logs_e[1] + logs_e[2]) / 3;
    double sxy = 0, sxx = 0;
    for (int i = 0; i < 3; ++i) {
      sxy += (logs_h[i] - mx) * (logs_e[i] - my);
      sxx += (logs_h[i] - mx) * (logs_h[i] - mx);
    }
    const double order = sxy / sxx;
    CHECK(order == doctest::Approx(2.0).epsilon(0.1));
  }

  TEST_CASE("same seed gives bitwise identical eigenvalues") {
    const auto op = assemble_magnetic(rasterize(DomainSpec::disc(1), 1.0 / 48), 5.0);
    SolverOptions o;
    o.method = SolverMethod::iterative;
    const auto a = lowest_eigenpairs(op, 40, o);
    const auto b = lowest_eigenpairs(op, 40, o);
    CHECK(a.eigenvalues == b.eigenvalues);
    CHECK(a.residuals == b.residuals);
  }

  TEST_CASE("Rayleigh quotients never fall below lambda_1") {
    const auto op = assemble_magnetic(rasterize(default_catalog().find("L-shape"), 1.0 / 40), 5.0);
    const auto r = lowest_eigenpairs(op, 1).require_converged();
    for (std::uint64_t s = 0; s < 20; ++s) {
      const ComplexVector v = random_vector(op.dimension(), s);
      const double q = (v.dot(op.entries * v)).real() / v.squaredNorm();
      CHECK(q >= r.eigenvalues[0] - r.tolerance);
    }
  }

  TEST_CASE("eigenvalue counts agree with the dense solver") {
    const auto op = assemble_dirichlet(rasterize(default_catalog().find("L-shape"), 1.0 / 50));
    REQUIRE(op.dimension() <= 2000);
    SolverOptions o;
    o.method = SolverMethod::iterative;
    const auto r = lowest_eigenpairs(op, 150, o).require_converged();
    const auto d = dense_spectrum(op);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(r.eigenvalues.front(), r.eigenvalues.back());
    for (int t = 0; t < 20; ++t) {
      const double lambda = u(rng);
      CHECK(r.count_below(lambda) == d.count_below(lambda));
    }
  }

  TEST_CASE("retained vectors are orthonormal and have small residuals") {
    const auto op = assemble_magnetic(rasterize(DomainSpec::rectangle(1, 1), 1.0 / 40), 8.0);
    SolverOptions o;
    o.keep_vectors = true;
    o.method = SolverMethod::iterative;
    const auto r = lowest_eigenpairs(op, 24, o).require_converged();
    REQUIRE(r.vectors.cols() == 24);
    const ComplexMatrix gram = r.vectors.adjoint() * r.vectors;
    CHECK((gram - ComplexMatrix::Identity(24, 24)).cwiseAbs().maxCoeff() < 1e-10);
    for (int j = 0; j < 24; ++j) {
      const ComplexVector v = r.vectors.col(j);
      const double res = (op.entries * v - r.eigenvalues[j] * v).norm();
      CHECK(res <= r.tolerance * 1.01);
    }
  }

  TEST_CASE("argument errors and early stop") {
    const auto op = assemble_dirichlet(rasterize(DomainSpec::rectangle(1, 1), 1.0 / 64));
    CHECK_THROWS_AS(lowest_eigenpairs(op, 0), Error);
    CHECK_THROWS_AS(lowest_eigenpairs(op, static_cast<int>(op.dimension()) + 1), Error);
    SolverOptions bad;
    bad.tol = 0.0;
    CHECK_THROWS_AS(lowest_eigenpairs(op, 1, bad), Error);

    SolverOptions tight;
    tight.method = SolverMethod::iterative;
    tight.max_iterations = 1;
    const auto r = lowest_eigenpairs(op, 40, tight);
    CHECK_FALSE(r.converged);
    CHECK(r.k_converged < 40);
    try {
      r.require_converged();
      FAIL("expected not_converged");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::not_converged);
    }

    const auto big = assemble_dirichlet(rasterize(DomainSpec::rectangle(1, 1), 1.0 / 72));
    REQUIRE(big.dimension() > SpectralDecomposition::kMaxDenseDimension);
    try {
      fractional_apply(big, 0.5, ComplexVector::Ones(big.dimension()));
      FAIL("expected dimension_too_large_for_dense");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::dimension_too_large_for_dense);
    }
  }

  TEST_CASE("cover multiple extends past k up to the limit") {
    const auto op = assemble_dirichlet(rasterize(DomainSpec::disc(1), 1.0 / 40));
    SolverOptions o;
    o.method = SolverMethod::iterative;
    o.cover_multiple = 10.0;
    o.k_limit = 400;
    const auto r = lowest_eigenpairs(op, 1, o).require_converged();
    CHECK(r.eigenvalues.back() >= 10.0 * r.eigenvalues.front());
    CHECK(r.eigenvalues[r.eigenvalues.size() - 2] < 10.0 * r.eigenvalues.front());
    o.k_limit = 12;
    const auto capped = lowest_eigenpairs(op, 1, o).require_converged();
    CHECK(capped.eigenvalues.size() == 12);
    for (int j = 0; j < 12; ++j) CHECK(capped.eigenvalues[j] == doctest::Approx(r.eigenvalues[j]).epsilon(1e-9));
  }

  TEST_CASE("fractional powers") {
    const auto g = rasterize(default_catalog().find("pentagon"), 1.0 / 20);
    const auto op = assemble_magnetic(g, 4.0);
    const SpectralDecomposition dec(op);
    const ComplexVector v = random_vector(op.dimension(), 1);
    const ComplexVector mv = op.entries * v;
    CHECK((fractional_apply(op, 1.0, v) - mv).norm() == 0.0);
    CHECK((dec.apply_power(1.0, v) - mv).norm() <= 1e-12 * mv.norm());
    const ComplexVector half = dec.apply_power(0.5, dec.apply_power(0.5, v));
    CHECK((half - mv).norm() <= 1e-10 * mv.norm());
    CHECK((fractional_apply(op, 0.5, fractional_apply(op, 0.5, v)) - mv).norm() <= 1e-10 * mv.norm());
    const ComplexVector e = dec.eigenvectors().col(3);
    const double lambda = dec.eigenvalues()(3);
    CHECK((dec.apply_power(0.3, e) - std::pow(lambda, 0.3) * e).norm() < 1e-10 * std::pow(lambda, 0.3));
    CHECK_THROWS_AS(fractional_apply(op, 0.0, v), Error);
    CHECK_THROWS_AS(fractional_apply(op, 1.5, v), Error);
  }

  TEST_CASE("Davies boundary inequality on the square") {
    const auto g = rasterize(DomainSpec::rectangle(1, 1), 1.0 / 24);
    const auto op = assemble_dirichlet(g);
    const SpectralDecomposition dec(op);
    const ComplexVector u = dec.eigenvectors().col(0);
    const double ri = 0.5;
    const auto rep = davies_inequality_check(dec, op, g, 2.0, ri / 4, u);
    CHECK(rep.verdict == Verdict::pass);
    CHECK(rep.slack > 0.0);
    CHECK(rep.inequality_id == InequalityId::davies_boundary);

    const auto zero = davies_inequality_check(dec, op, g, 2.0, ri / 4, ComplexVector::Zero(op.dimension()));
    CHECK(zero.lhs == 0.0);
    CHECK(zero.rhs == 0.0);
    CHECK(zero.verdict == Verdict::pass);

    // The shell mass saturates at ||u||^2 while the right side keeps growing.
    double prev = -1e300;
    for (int i = 1; i <= 16; ++i) {
      const auto r = davies_inequality_check(dec, op, g, 2.0, ri * i / 16.0, u);
      CHECK(r.slack >= prev);
      CHECK(r.lhs <= u.squaredNorm() * g.spacing * g.spacing * (1 + 1e-12));
      prev = r.slack;
    }

    CHECK_THROWS_AS(davies_inequality_check(dec, op, g, 1.5, 0.1, u), Error);
  }
}
