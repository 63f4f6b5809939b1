#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <set>

#include "spectrolab/catalog.hpp"
#include "spectrolab/error.hpp"
#include "spectrolab/geometry.hpp"

using namespace spectrolab;

namespace {

const double pi = std::numbers::pi;

DomainSpec l_shape() {
  return DomainSpec::polygon({{0, 0}, {1, 0}, {1, 0.5}, {0.5, 0.5}, {0.5, 1}, {0, 1}}, "L");
}

DomainSpec pentagon() { return default_catalog().find("pentagon"); }

// Independent oracles: ray casting and point-to-segment distance.
bool inside_polygon(const std::vector<Vec2>& v, double x, double y) {
  bool in = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if ((v[i].y > y) != (v[j].y > y) && x < (v[j].x - v[i].x) * (y - v[i].y) / (v[j].y - v[i].y) + v[i].x) in = !in;
  }
  return in;
}

double segment_distance(double px, double py, Vec2 a, Vec2 b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  double t = ((px - a.x) * dx + (py - a.y) * dy) / (dx * dx + dy * dy);
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(px - a.x - t * dx, py - a.y - t * dy);
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::io;
}

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("square at h = 1/4 has the 3x3 interior lattice") {
    const auto g = rasterize(DomainSpec::rectangle(1, 1), 0.25, SpacingGuard::off);
    REQUIRE(g.point_count() == 9);
    std::set<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < g.point_count(); ++i) {
      const Point p = g.coordinates(i);
      pts.insert({p[0], p[1]});
    }
    for (double x : {0.25, 0.5, 0.75}) {
      for (double y : {0.25, 0.5, 0.75}) CHECK(pts.count({x, y}) == 1);
    }
  }

  TEST_CASE("unit disc at h = 1/2 keeps the 3x3 block") {
    // The diagonal nodes sit at radius 0.707 < 1, so they are interior too.
    const auto g = rasterize(DomainSpec::disc(1), 0.5, SpacingGuard::off);
    REQUIRE(g.point_count() == 9);
    std::set<std::pair<double, double>> pts, expected;
    for (std::size_t i = 0; i < g.point_count(); ++i) pts.insert({g.coordinates(i)[0], g.coordinates(i)[1]});
    for (double x : {-0.5, 0.0, 0.5})
      for (double y : {-0.5, 0.0, 0.5}) expected.insert({x, y});
    CHECK(pts == expected);
  }

  TEST_CASE("L-shape raster agrees with a brute-force scan") {
    const auto spec = l_shape();
    const double h = 0.1;
    const auto g = rasterize(spec, h, SpacingGuard::off);
    std::size_t count = 0;
    for (int i = -2; i <= 12; ++i) {
      for (int j = -2; j <= 12; ++j) {
        const double x = i * h, y = j * h;
        if (!inside_polygon(spec.vertices, x, y)) continue;
        double d = 1e9;
        for (std::size_t e = 0; e < spec.vertices.size(); ++e) {
          d = std::min(d, segment_distance(x, y, spec.vertices[e], spec.vertices[(e + 1) % spec.vertices.size()]));
        }
        if (d > 1e-12) ++count;
      }
    }
    CHECK(g.point_count() == count);
  }

  TEST_CASE("index map is a bijection and distances are exact and positive") {
    for (const auto& spec : {l_shape(), DomainSpec::disc(1.0), pentagon()}) {
      const auto g = rasterize(spec, 1.0 / 40.0);
      for (std::size_t i = 0; i < g.point_count(); ++i) {
        CHECK(g.index_of(g.lattice[i]) == static_cast<std::int32_t>(i));
        CHECK(g.distance[i] > 0.0);
        CHECK(g.distance[i] == doctest::Approx(boundary_distance(spec, g.coordinates(i))).epsilon(1e-14));
      }
      std::size_t mapped = 0;
      for (auto v : g.index_map) mapped += v >= 0 ? 1 : 0;
      CHECK(mapped == g.point_count());
    }
  }

  TEST_CASE("raster errors") {
    CHECK(kind_of([] { rasterize(DomainSpec::disc(1), 0.25); }) == ErrorKind::spacing_too_coarse);
    CHECK(kind_of([] { rasterize(DomainSpec::rectangle(0.1, 0.1), 0.2, SpacingGuard::off); }) ==
          ErrorKind::empty_grid);
  }

  TEST_CASE("boundary distance examples") {
    CHECK(boundary_distance(DomainSpec::rectangle(1, 1), {0.5, 0.5, 0}) == doctest::Approx(0.5));
    CHECK(boundary_distance(DomainSpec::disc(2), {1, 0, 0}) == doctest::Approx(1.0));
    CHECK(boundary_distance(DomainSpec::disc(2), {3, 0, 0}) == 0.0);
    CHECK(boundary_distance(l_shape(), {0.75, 0.75, 0}) == 0.0);
  }

  TEST_CASE("pentagon distance matches dense boundary sampling") {
    const auto spec = pentagon();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int tested = 0;
    while (tested < 10) {
      const double x = u(rng), y = u(rng);
      if (!inside_polygon(spec.vertices, x, y)) continue;
      double best = 1e9;
      constexpr int samples = 200000;
      for (std::size_t e = 0; e < spec.vertices.size(); ++e) {
        const Vec2 a = spec.vertices[e], b = spec.vertices[(e + 1) % spec.vertices.size()];
        for (int s = 0; s <= samples; ++s) {
          const double t = static_cast<double>(s) / samples;
          best = std::min(best, std::hypot(x - a.x - t * (b.x - a.x), y - a.y - t * (b.y - a.y)));
        }
      }
      CHECK(std::abs(boundary_distance(spec, {x, y, 0}) - best) < 1e-9);
      ++tested;
    }
  }

  TEST_CASE("unit square functionals") {
    const auto f = compute_functionals(DomainSpec::rectangle(1, 1));
    CHECK(f.volume == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.inradius == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(f.inertia - 1.0 / 6.0) < 1e-6);
    CHECK(f.centroid[0] == doctest::Approx(0.5));
    CHECK(f.centroid[1] == doctest::Approx(0.5));
    CHECK(std::abs(f.sigma - 2.0) < 2e-6);
    CHECK(f.hardy == 4.0);
    CHECK(f.is_convex);
  }

  TEST_CASE("unit disc functionals") {
    const auto f = compute_functionals(DomainSpec::disc(1));
    CHECK(f.volume == doctest::Approx(pi).epsilon(1e-12));
    CHECK(f.inradius == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.inertia == doctest::Approx(pi / 2).epsilon(1e-12));
    CHECK(std::abs(f.sigma - pi) / pi < 1e-3);
  }

  TEST_CASE("Hardy constants") {
    CHECK(hardy_constant(DomainSpec::rectangle(2, 1)) == 4.0);
    CHECK(hardy_constant(l_shape()) == 16.0);
    auto s = l_shape();
    s.hardy_override = 7.3;
    CHECK(hardy_constant(s) == 7.3);
    CHECK(kind_of([] { hardy_constant(DomainSpec::product(1.0, DomainSpec::polygon(l_shape().vertices))); }) ==
          ErrorKind::hardy_unknown);
    CHECK(hardy_constant(DomainSpec::product(1.0, DomainSpec::rectangle(1, 1))) == 4.0);
  }

  TEST_CASE("sigma equals volume over inradius on convex domains") {
    CHECK(sigma_convex_identity_gap(DomainSpec::rectangle(1, 1)) < 1e-3);
    CHECK(sigma_convex_identity_gap(DomainSpec::disc(1)) < 1e-3);
    CHECK(sigma_convex_identity_gap(DomainSpec::rectangle(10, 0.1)) < 1e-3);
    for (const auto& d : default_catalog().domains) {
      if (is_convex(d)) CHECK_MESSAGE(sigma_convex_identity_gap(d) < 1e-3, d.label);
    }
    CHECK(kind_of([] { sigma_convex_identity_gap(l_shape()); }) == ErrorKind::not_convex);
  }

  TEST_CASE("isoperimetric inertia inequality") {
    const auto disc = compute_functionals(DomainSpec::disc(1));
    CHECK(isoperimetric_inertia_check(disc));
    CHECK(disc.inertia == doctest::Approx(0.5 * disc.volume * disc.volume / pi).epsilon(1e-12));
    CHECK(isoperimetric_inertia_check(DomainSpec::rectangle(1, 1)));
    CHECK(1.0 / 6.0 > 0.5 / pi);
    const auto thin = compute_functionals(DomainSpec::rectangle(10, 0.1));
    CHECK(isoperimetric_inertia_check(thin));
    CHECK(thin.inertia > 10.0 * 0.5 * thin.volume * thin.volume / pi);
  }

  TEST_CASE("sigma never exceeds volume over inradius") {
    for (const auto& d : default_catalog().domains) {
      const auto f = compute_functionals(d);
      CHECK_MESSAGE(f.sigma <= f.volume / f.inradius * (1.0 + 1e-3), d.label);
      CHECK(f.sigma > 0.0);
      CHECK(f.hardy >= 4.0);
    }
  }

  TEST_CASE("shell volumes are monotone in beta") {
    for (const auto& d : {l_shape(), pentagon(), DomainSpec::disc(1)}) {
      const double ri = inradius(d);
      const ShellVolume shells(d, ri, 128);
      double prev = -1.0;
      for (int i = 0; i <= 400; ++i) {
        const double v = shells(ri * i / 400.0);
        CHECK(v >= prev);
        prev = v;
      }
    }
  }

  TEST_CASE("functionals scale with the domain") {
    for (const auto& d : {l_shape(), pentagon(), DomainSpec::rectangle(2, 1)}) {
      const auto f = compute_functionals(d);
      for (double t : {0.5, 2.0}) {
        const auto g = compute_functionals(d.scaled(t));
        CHECK(g.volume == doctest::Approx(t * t * f.volume).epsilon(1e-12));
        CHECK(g.inradius == doctest::Approx(t * f.inradius).epsilon(1e-9));
        CHECK(g.sigma == doctest::Approx(t * f.sigma).epsilon(1e-3));
        CHECK(g.inertia == doctest::Approx(std::pow(t, 4) * f.inertia).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("centroid minimises the moment of inertia") {
    for (const auto& d : {l_shape(), pentagon()}) {
      const auto f = compute_functionals(d);
      for (const Point shift : {Point{0.01, 0, 0}, Point{0, -0.2, 0}, Point{0.3, 0.3, 0}}) {
        const Point a{f.centroid[0] + shift[0], f.centroid[1] + shift[1], 0};
        CHECK(moment_of_inertia(d, a) > f.inertia);
      }
    }
  }

  TEST_CASE("invalid domains are rejected") {
    CHECK(kind_of([] { validate(DomainSpec::rectangle(-1, 1)); }) == ErrorKind::invalid_domain);
    CHECK(kind_of([] { validate(DomainSpec::disc(0)); }) == ErrorKind::invalid_domain);
    CHECK(kind_of([] { validate(DomainSpec::polygon({{0, 0}, {1, 1}, {1, 0}, {0, 1}})); }) ==
          ErrorKind::non_simple_polygon);
    CHECK(kind_of([] { validate(DomainSpec::convex_polygon(l_shape().vertices)); }) == ErrorKind::not_convex);
    CHECK(kind_of([] { validate(DomainSpec::polygon({{0, 0}, {1, 0}, {2, 0}})); }) == ErrorKind::degenerate_domain);
    CHECK(kind_of([] { validate(DomainSpec::polygon({{0, 0}, {1, 0}})); }) == ErrorKind::invalid_domain);
  }

  TEST_CASE("product domains") {
    const auto p = DomainSpec::product(2.0, DomainSpec::rectangle(1, 1));
    CHECK(p.dimension() == 3);
    const auto f = compute_functionals(p);
    CHECK(f.dimension == 3);
    CHECK(f.volume == doctest::Approx(2.0));
    CHECK(f.inradius == doctest::Approx(0.5));
    CHECK(boundary_distance(p, {0.5, 0.5, 1.0}) == doctest::Approx(0.5));
    CHECK(boundary_distance(p, {0.5, 0.5, 0.1}) == doctest::Approx(0.1));
  }
}
