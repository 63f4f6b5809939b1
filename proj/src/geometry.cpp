#include "spectrolab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "spectrolab/error.hpp"

namespace spectrolab {

namespace {

constexpr double kPi = std::numbers::pi;

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

// Crossing-number test; boundary points are resolved by the distance check.
bool point_in_polygon(const std::vector<Vec2>& v, const Vec2& p) {
  bool inside = false;
  const std::size_t n = v.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = v[i];
    const Vec2& b = v[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

double polygon_distance(const std::vector<Vec2>& v, const Vec2& p) {
  if (!point_in_polygon(v, p)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    best = std::min(best, segment_distance(p, v[i], v[(i + 1) % v.size()]));
  }
  return best;
}

double planar_distance(const DomainSpec& s, double x, double y) {
  switch (s.kind) {
    case DomainKind::rectangle: {
      const double d = std::min({x, s.width - x, y, s.height - y});
      return d > 0.0 ? d : 0.0;
    }
    case DomainKind::disc: {
      const double d = s.radius - std::hypot(x, y);
      return d > 0.0 ? d : 0.0;
    }
    case DomainKind::convex_polygon:
    case DomainKind::polygon:
      return polygon_distance(s.vertices, {x, y});
    case DomainKind::product:
      break;
  }
  throw Error(ErrorKind::invalid_domain, "planar distance requested for a product domain");
}

double signed_area(const std::vector<Vec2>& v) {
  double a = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2& p = v[i];
    const Vec2& q = v[(i + 1) % v.size()];
    a += p.x * q.y - q.x * p.y;
  }
  return 0.5 * a;
}

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  const double d1 = cross(q1, q2, p1);
  const double d2 = cross(q1, q2, p2);
  const double d3 = cross(p1, p2, q1);
  const double d4 = cross(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  return (d1 == 0 && on_segment(q1, q2, p1)) || (d2 == 0 && on_segment(q1, q2, p2)) ||
         (d3 == 0 && on_segment(p1, p2, q1)) || (d4 == 0 && on_segment(p1, p2, q2));
}

struct PlanarRegion {
  double xmin, xmax, ymin, ymax;
};

PlanarRegion planar_box(const DomainSpec& s) {
  switch (s.kind) {
    case DomainKind::rectangle:
      return {0.0, s.width, 0.0, s.height};
    case DomainKind::disc:
      return {-s.radius, s.radius, -s.radius, s.radius};
    case DomainKind::convex_polygon:
    case DomainKind::polygon: {
      PlanarRegion r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
                     std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
      for (const Vec2& p : s.vertices) {
        r.xmin = std::min(r.xmin, p.x);
        r.xmax = std::max(r.xmax, p.x);
        r.ymin = std::min(r.ymin, p.y);
        r.ymax = std::max(r.ymax, p.y);
      }
      return r;
    }
    case DomainKind::product:
      return planar_box(*s.base);
  }
  return {};
}

double polygon_inradius(const DomainSpec& s) {
  const PlanarRegion box = planar_box(s);
  constexpr int kGrid = 256;
  const double hx = (box.xmax - box.xmin) / kGrid;
  const double hy = (box.ymax - box.ymin) / kGrid;

  struct Candidate {
    double value;
    Vec2 p;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(kGrid * kGrid);
  for (int i = 0; i < kGrid; ++i) {
    for (int j = 0; j < kGrid; ++j) {
      const Vec2 p{box.xmin + (i + 0.5) * hx, box.ymin + (j + 0.5) * hy};
      const double d = polygon_distance(s.vertices, p);
      if (d > 0.0) candidates.push_back({d, p});
    }
  }
  if (candidates.empty()) throw Error(ErrorKind::degenerate_domain, "polygon contains no grid cell");
  const std::size_t keep = std::min<std::size_t>(16, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + keep, candidates.end(),
                    [](const Candidate& a, const Candidate& b) { return a.value > b.value; });

  constexpr int kDirections = 32;
  std::array<Vec2, kDirections> dirs;
  for (int k = 0; k < kDirections; ++k) {
    const double phi = 2.0 * kPi * k / kDirections;
    dirs[k] = {std::cos(phi), std::sin(phi)};
  }

  const double scale = std::max(box.xmax - box.xmin, box.ymax - box.ymin);
  double best = 0.0;
  for (std::size_t c = 0; c < keep; ++c) {
    Vec2 p = candidates[c].p;
    double value = candidates[c].value;
    double step = std::max(hx, hy);
    for (int iter = 0; iter < 20000 && step > 1e-15 * scale; ++iter) {
      double best_move = value;
      Vec2 best_p = p;
      for (const Vec2& d : dirs) {
        const Vec2 q{p.x + step * d.x, p.y + step * d.y};
        const double v = polygon_distance(s.vertices, q);
        if (v > best_move) {
          best_move = v;
          best_p = q;
        }
      }
      if (best_move > value) {
        value = best_move;
        p = best_p;
      } else {
        step *= 0.5;
      }
    }
    best = std::max(best, value);
  }
  return best;
}

// int x^2, int y^2 over a polygon translated by -a.
std::array<double, 2> polygon_second_moments(const std::vector<Vec2>& v, const Vec2& a) {
  double ixx = 0.0;
  double iyy = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x0 = v[i].x - a.x;
    const double y0 = v[i].y - a.y;
    const double x1 = v[(i + 1) % v.size()].x - a.x;
    const double y1 = v[(i + 1) % v.size()].y - a.y;
    const double c = x0 * y1 - x1 * y0;
    ixx += (x0 * x0 + x0 * x1 + x1 * x1) * c;
    iyy += (y0 * y0 + y0 * y1 + y1 * y1) * c;
  }
  const double sign = signed_area(v) < 0.0 ? -1.0 : 1.0;
  return {sign * ixx / 12.0, sign * iyy / 12.0};
}

double planar_inertia(const DomainSpec& s, const Vec2& a) {
  switch (s.kind) {
    case DomainKind::rectangle: {
      const double w = s.width;
      const double h = s.height;
      const double dx = w / 2.0 - a.x;
      const double dy = h / 2.0 - a.y;
      return w * h * (w * w + h * h) / 12.0 + w * h * (dx * dx + dy * dy);
    }
    case DomainKind::disc: {
      const double r = s.radius;
      return kPi * r * r * r * r / 2.0 + kPi * r * r * (a.x * a.x + a.y * a.y);
    }
    case DomainKind::convex_polygon:
    case DomainKind::polygon: {
      const auto m = polygon_second_moments(s.vertices, a);
      return m[0] + m[1];
    }
    case DomainKind::product:
      break;
  }
  throw Error(ErrorKind::invalid_domain, "planar inertia requested for a product domain");
}

}  // namespace

// ---------------------------------------------------------------------------

std::string to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::rectangle: return "rectangle";
    case DomainKind::disc: return "disc";
    case DomainKind::convex_polygon: return "convex-polygon";
    case DomainKind::polygon: return "polygon";
    case DomainKind::product: return "product";
  }
  return "unknown";
}

DomainKind domain_kind_from_string(const std::string& name) {
  if (name == "rectangle") return DomainKind::rectangle;
  if (name == "disc") return DomainKind::disc;
  if (name == "convex-polygon") return DomainKind::convex_polygon;
  if (name == "polygon") return DomainKind::polygon;
  if (name == "product") return DomainKind::product;
  throw Error(ErrorKind::invalid_domain, "unknown domain kind '" + name + "'");
}

DomainSpec DomainSpec::rectangle(double a, double b, std::string label) {
  DomainSpec s;
  s.kind = DomainKind::rectangle;
  s.width = a;
  s.height = b;
  s.label = std::move(label);
  return s;
}

DomainSpec DomainSpec::disc(double r, std::string label) {
  DomainSpec s;
  s.kind = DomainKind::disc;
  s.radius = r;
  s.label = std::move(label);
  return s;
}

DomainSpec DomainSpec::convex_polygon(std::vector<Vec2> vertices, std::string label) {
  DomainSpec s;
  s.kind = DomainKind::convex_polygon;
  s.vertices = std::move(vertices);
  s.label = std::move(label);
  return s;
}

DomainSpec DomainSpec::polygon(std::vector<Vec2> vertices, std::string label) {
  DomainSpec s;
  s.kind = DomainKind::polygon;
  s.vertices = std::move(vertices);
  s.label = std::move(label);
  return s;
}

DomainSpec DomainSpec::product(double interval, DomainSpec base, std::string label) {
  DomainSpec s;
  s.kind = DomainKind::product;
  s.interval = interval;
  s.base = std::make_shared<const DomainSpec>(std::move(base));
  s.label = std::move(label);
  return s;
}

DomainSpec DomainSpec::scaled(double t) const {
  DomainSpec s = *this;
  s.width *= t;
  s.height *= t;
  s.radius *= t;
  for (Vec2& p : s.vertices) {
    p.x *= t;
    p.y *= t;
  }
  s.interval *= t;
  if (base) s.base = std::make_shared<const DomainSpec>(base->scaled(t));
  return s;
}

bool polygon_is_convex(const std::vector<Vec2>& v) {
  const std::size_t n = v.size();
  if (n < 3) return false;
  double scale = 0.0;
  for (const Vec2& p : v) scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
  const double eps = 1e-14 * std::max(scale * scale, 1e-300);
  int sign = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = cross(v[i], v[(i + 1) % n], v[(i + 2) % n]);
    if (std::abs(c) <= eps) continue;
    const int s = c > 0 ? 1 : -1;
    if (sign == 0) sign = s;
    else if (s != sign) return false;
  }
  return sign != 0;
}

bool polygon_is_simple(const std::vector<Vec2>& v) {
  const std::size_t n = v.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = v[i];
    const Vec2& b = v[(i + 1) % n];
    if (a.x == b.x && a.y == b.y) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      const Vec2& c = v[j];
      const Vec2& d = v[(j + 1) % n];
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) {
        // Adjacent edges may only share their common vertex: reject folds back
        // along the same line.
        const Vec2& shared = (j == i + 1) ? b : a;
        const Vec2& other_e1 = (j == i + 1) ? a : b;
        const Vec2& other_e2 = (j == i + 1) ? d : c;
        if (cross(shared, other_e1, other_e2) == 0.0) {
          const double dot = (other_e1.x - shared.x) * (other_e2.x - shared.x) +
                             (other_e1.y - shared.y) * (other_e2.y - shared.y);
          if (dot > 0.0) return false;
        }
        continue;
      }
      if (segments_intersect(a, b, c, d)) return false;
    }
  }
  return true;
}

namespace {

bool all_collinear(const std::vector<Vec2>& v) {
  const Vec2 a = v.front();
  for (const Vec2& b : v) {
    if (b.x == a.x && b.y == a.y) continue;
    for (const Vec2& c : v) {
      if ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x) != 0.0) return false;
    }
    return true;
  }
  return true;
}

}  // namespace

void validate(const DomainSpec& s) {
  switch (s.kind) {
    case DomainKind::rectangle:
      if (!(s.width > 0.0) || !(s.height > 0.0)) {
        throw Error(ErrorKind::invalid_domain, "rectangle sides must be positive");
      }
      break;
    case DomainKind::disc:
      if (!(s.radius > 0.0)) throw Error(ErrorKind::invalid_domain, "disc radius must be positive");
      break;
    case DomainKind::convex_polygon:
    case DomainKind::polygon:
      if (s.vertices.size() < 3) {
        throw Error(ErrorKind::invalid_domain, "polygon needs at least three vertices");
      }
      if (all_collinear(s.vertices)) throw Error(ErrorKind::degenerate_domain, "polygon vertices are collinear");
      if (!polygon_is_simple(s.vertices)) {
        throw Error(ErrorKind::non_simple_polygon, "polygon '" + s.label + "' self-intersects");
      }
      if (std::abs(signed_area(s.vertices)) == 0.0) {
        throw Error(ErrorKind::degenerate_domain, "polygon has zero area");
      }
      if (s.kind == DomainKind::convex_polygon && !polygon_is_convex(s.vertices)) {
        throw Error(ErrorKind::not_convex, "convex-polygon '" + s.label + "' fails the convexity check");
      }
      break;
    case DomainKind::product:
      if (!(s.interval > 0.0)) throw Error(ErrorKind::invalid_domain, "product interval must be positive");
      if (!s.base) throw Error(ErrorKind::invalid_domain, "product domain without a base");
      if (s.base->kind == DomainKind::product) {
        throw Error(ErrorKind::invalid_domain, "nested products are not supported");
      }
      validate(*s.base);
      break;
  }
  if (s.hardy_override && !(*s.hardy_override > 0.0)) {
    throw Error(ErrorKind::invalid_domain, "hardy_override must be positive");
  }
}

BoundingBox bounding_box(const DomainSpec& s) {
  const PlanarRegion r = planar_box(s);
  BoundingBox box;
  box.lo = {r.xmin, r.ymin, 0.0};
  box.hi = {r.xmax, r.ymax, s.kind == DomainKind::product ? s.interval : 0.0};
  return box;
}

double boundary_distance(const DomainSpec& s, const Point& x) {
  if (s.kind == DomainKind::product) {
    const double dz = std::min(x[2], s.interval - x[2]);
    if (!(dz > 0.0)) return 0.0;
    return std::min(planar_distance(*s.base, x[0], x[1]), dz);
  }
  return planar_distance(s, x[0], x[1]);
}

bool is_convex(const DomainSpec& s) {
  switch (s.kind) {
    case DomainKind::rectangle:
    case DomainKind::disc:
    case DomainKind::convex_polygon:
      return true;
    case DomainKind::polygon:
      return polygon_is_convex(s.vertices);
    case DomainKind::product:
      return is_convex(*s.base);
  }
  return false;
}

double volume(const DomainSpec& s) {
  switch (s.kind) {
    case DomainKind::rectangle: return s.width * s.height;
    case DomainKind::disc: return kPi * s.radius * s.radius;
    case DomainKind::convex_polygon:
    case DomainKind::polygon: return std::abs(signed_area(s.vertices));
    case DomainKind::product: return s.interval * volume(*s.base);
  }
  return 0.0;
}

double perimeter(const DomainSpec& s) {
  switch (s.kind) {
    case DomainKind::rectangle: return 2.0 * (s.width + s.height);
    case DomainKind::disc: return 2.0 * kPi * s.radius;
    case DomainKind::convex_polygon:
    case DomainKind::polygon: {
      double p = 0.0;
      for (std::size_t i = 0; i < s.vertices.size(); ++i) {
        const Vec2& a = s.vertices[i];
        const Vec2& b = s.vertices[(i + 1) % s.vertices.size()];
        p += std::hypot(b.x - a.x, b.y - a.y);
      }
      return p;
    }
    case DomainKind::product:
      return 2.0 * volume(*s.base) + s.interval * perimeter(*s.base);
  }
  return 0.0;
}

Point centroid(const DomainSpec& s) {
  switch (s.kind) {
    case DomainKind::rectangle: return {s.width / 2.0, s.height / 2.0, 0.0};
    case DomainKind::disc: return {0.0, 0.0, 0.0};
    case DomainKind::convex_polygon:
    case DomainKind::polygon: {
      const auto& v = s.vertices;
      double cx = 0.0;
      double cy = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        const Vec2& p = v[i];
        const Vec2& q = v[(i + 1) % v.size()];
        const double c = p.x * q.y - q.x * p.y;
        cx += (p.x + q.x) * c;
        cy += (p.y + q.y) * c;
      }
      const double a6 = 6.0 * signed_area(v);
      return {cx / a6, cy / a6, 0.0};
    }
    case DomainKind::product: {
      Point c = centroid(*s.base);
      c[2] = s.interval / 2.0;
      return c;
    }
  }
  return {};
}

double moment_of_inertia(const DomainSpec& s, const Point& a) {
  if (s.kind == DomainKind::product) {
    // int over base x (0,L) of |x-a|^2 splits into planar and axial parts.
    const double len = s.interval;
    const double axial = len * len * len / 12.0 + len * std::pow(len / 2.0 - a[2], 2);
    return len * planar_inertia(*s.base, {a[0], a[1]}) + volume(*s.base) * axial;
  }
  return planar_inertia(s, {a[0], a[1]});
}

double inradius(const DomainSpec& s) {
  switch (s.kind) {
    case DomainKind::rectangle: return std::min(s.width, s.height) / 2.0;
    case DomainKind::disc: return s.radius;
    case DomainKind::convex_polygon:
    case DomainKind::polygon: return polygon_inradius(s);
    case DomainKind::product: return std::min(inradius(*s.base), s.interval / 2.0);
  }
  return 0.0;
}

double hardy_constant(const DomainSpec& s) {
  if (s.hardy_override) return *s.hardy_override;
  if (is_convex(s)) return 4.0;
  // Simple polygons are simply connected.
  if (s.dimension() == 2) return 16.0;
  throw Error(ErrorKind::hardy_unknown,
              "no Hardy constant known for non-convex domain '" + s.label + "'; set hardy_override");
}

// ---------------------------------------------------------------------------

Point GridDomain::coordinates(std::size_t i) const {
  const auto& l = lattice[i];
  return {spacing * static_cast<double>(l[0]), spacing * static_cast<double>(l[1]),
          spacing * static_cast<double>(l[2])};
}

std::int32_t GridDomain::index_of(const std::array<long, 3>& ijk) const {
  std::size_t flat = 0;
  std::size_t stride = 1;
  for (int axis = 0; axis < 3; ++axis) {
    const long rel = ijk[axis] - lattice_lo[axis];
    if (rel < 0 || rel >= lattice_extent[axis]) return -1;
    flat += static_cast<std::size_t>(rel) * stride;
    stride *= static_cast<std::size_t>(lattice_extent[axis]);
  }
  return index_map[flat];
}

GridDomain rasterize(const DomainSpec& spec, double h, SpacingGuard guard) {
  validate(spec);
  if (!(h > 0.0)) throw Error(ErrorKind::invalid_argument, "grid spacing must be positive");
  if (guard == SpacingGuard::enforce) {
    const double ri = inradius(spec);
    if (h >= ri / 4.0) {
      throw Error(ErrorKind::spacing_too_coarse,
                  "h = " + std::to_string(h) + " is not below inradius/4 = " + std::to_string(ri / 4.0));
    }
  }

  GridDomain g;
  g.spacing = h;
  g.dim = spec.dimension();
  g.bounding_box = bounding_box(spec);
  for (int axis = 0; axis < 3; ++axis) {
    if (axis >= g.dim) {
      g.lattice_lo[axis] = 0;
      g.lattice_extent[axis] = 1;
      continue;
    }
    const long lo = static_cast<long>(std::floor(g.bounding_box.lo[axis] / h));
    const long hi = static_cast<long>(std::ceil(g.bounding_box.hi[axis] / h));
    g.lattice_lo[axis] = lo;
    g.lattice_extent[axis] = hi - lo + 1;
  }
  const std::size_t total = static_cast<std::size_t>(g.lattice_extent[0]) *
                            static_cast<std::size_t>(g.lattice_extent[1]) *
                            static_cast<std::size_t>(g.lattice_extent[2]);
  g.index_map.assign(total, -1);

  // Points within a sliver of the boundary are treated as boundary points.
  const double interior_eps = 1e-9 * h;
  std::size_t flat = 0;
  for (long k = 0; k < g.lattice_extent[2]; ++k) {
    for (long j = 0; j < g.lattice_extent[1]; ++j) {
      for (long i = 0; i < g.lattice_extent[0]; ++i, ++flat) {
        const std::array<long, 3> ijk{g.lattice_lo[0] + i, g.lattice_lo[1] + j, g.lattice_lo[2] + k};
        const Point x{h * static_cast<double>(ijk[0]), h * static_cast<double>(ijk[1]),
                      h * static_cast<double>(ijk[2])};
        const double d = boundary_distance(spec, x);
        if (d > interior_eps) {
          g.index_map[flat] = static_cast<std::int32_t>(g.lattice.size());
          g.lattice.push_back(ijk);
          g.distance.push_back(d);
        }
      }
    }
  }
  if (g.lattice.empty()) {
    throw Error(ErrorKind::empty_grid, "no lattice point of spacing " + std::to_string(h) + " lies inside '" +
                                           spec.label + "'");
  }
  return g;
}

// ---------------------------------------------------------------------------

ShellVolume::ShellVolume(const DomainSpec& spec, double ri, int hq_divisor) {
  if (hq_divisor < 1) throw Error(ErrorKind::invalid_argument, "hq divisor must be positive");
  const DomainSpec& planar = spec.kind == DomainKind::product ? *spec.base : spec;
  const double hq = ri / hq_divisor;
  const PlanarRegion box = planar_box(planar);
  const auto nx = static_cast<std::size_t>(std::ceil((box.xmax - box.xmin) / hq - 1e-9));
  const auto ny = static_cast<std::size_t>(std::ceil((box.ymax - box.ymin) / hq - 1e-9));

  // Planar distances of a product base never exceed the base in-radius, which
  // may be larger than the product in-radius.
  const double top = (spec.kind == DomainKind::product ? inradius(planar) : ri) * (1.0 + 1e-6);
  bin_width_ = top / static_cast<double>(kBins);
  std::vector<std::uint64_t> counts(kBins, 0);
  std::size_t inside = 0;
  for (std::size_t j = 0; j < ny; ++j) {
    const double y = box.ymin + (static_cast<double>(j) + 0.5) * hq;
    for (std::size_t i = 0; i < nx; ++i) {
      const double x = box.xmin + (static_cast<double>(i) + 0.5) * hq;
      const double d = planar_distance(planar, x, y);
      if (!(d > 0.0)) continue;
      ++inside;
      const auto bin = std::min(kBins - 1, static_cast<std::size_t>(d / bin_width_));
      ++counts[bin];
    }
  }
  if (inside == 0) throw Error(ErrorKind::degenerate_domain, "shell quadrature found no interior cell");

  cumulative_.assign(kBins + 1, 0);
  for (std::size_t b = 0; b < kBins; ++b) cumulative_[b + 1] = cumulative_[b] + counts[b];
  integral_.assign(kBins + 1, 0.0);
  for (std::size_t b = 0; b < kBins; ++b) {
    integral_[b + 1] = integral_[b] + 0.5 * bin_width_ * static_cast<double>(cumulative_[b] + cumulative_[b + 1]);
  }

  cell_measure_ = hq * hq;
  quadrature_ = {hq, nx * ny, inside};
  if (spec.kind == DomainKind::product) {
    interval_ = spec.interval;
    base_volume_ = static_cast<double>(inside) * cell_measure_;
  }
}

double ShellVolume::count_integral(double t) const {
  if (!(t > 0.0)) return 0.0;
  const double pos = t / bin_width_;
  if (pos >= static_cast<double>(kBins)) {
    return integral_.back() + (t - bin_width_ * static_cast<double>(kBins)) * static_cast<double>(cumulative_.back());
  }
  const auto b = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(b);
  const double lo = static_cast<double>(cumulative_[b]);
  const double hi = static_cast<double>(cumulative_[b + 1]);
  // Trapezoid over the partial bin of the linearly interpolated count.
  return integral_[b] + bin_width_ * frac * (lo + 0.5 * frac * (hi - lo));
}

double ShellVolume::planar_measure_below(double beta) const {
  if (!(beta > 0.0)) return 0.0;
  const double hq = quadrature_.spacing;
  const double cells = (count_integral(beta + 0.5 * hq) - count_integral(beta - 0.5 * hq)) / hq;
  return cells * cell_measure_;
}

double ShellVolume::operator()(double beta) const {
  if (interval_ > 0.0) {
    // {delta >= beta} = {delta_base >= beta} x [beta, L - beta].
    const double core_base = base_volume_ - planar_measure_below(beta);
    const double core_len = std::max(interval_ - 2.0 * beta, 0.0);
    return base_volume_ * interval_ - core_base * core_len;
  }
  return planar_measure_below(beta);
}

double ShellVolume::total() const {
  if (interval_ > 0.0) return base_volume_ * interval_;
  return static_cast<double>(cumulative_.back()) * cell_measure_;
}

SigmaSearch minimize_shell_ratio(const ShellVolume& shells, double ri) {
  constexpr int kCandidates = 64;
  const double lo = 1e-3 * ri;
  const double hi = ri * (1.0 - 1e-9);
  auto ratio = [&](double beta) { return shells(beta) / beta; };

  std::array<double, kCandidates> betas{};
  int best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kCandidates; ++i) {
    betas[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (kCandidates - 1));
    const double v = ratio(betas[i]);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }

  double a = betas[std::max(best - 1, 0)];
  double b = betas[std::min(best + 1, kCandidates - 1)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = ratio(c);
  double fd = ratio(d);
  for (int iter = 0; iter < 100 && (b - a) > 1e-15 * ri; ++iter) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = ratio(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = ratio(d);
    }
  }
  SigmaSearch out{best_value, betas[best]};
  for (const double beta : {a, b, c, d}) {
    const double v = ratio(beta);
    if (v < out.sigma) out = {v, beta};
  }
  return out;
}

GeometricFunctionals compute_functionals(const DomainSpec& spec, FunctionalOptions options) {
  validate(spec);
  GeometricFunctionals f;
  f.label = spec.label;
  f.dimension = spec.dimension();
  f.volume = volume(spec);
  if (!(f.volume > 0.0)) throw Error(ErrorKind::degenerate_domain, "domain '" + spec.label + "' has zero volume");
  f.perimeter = perimeter(spec);
  f.inradius = inradius(spec);
  f.centroid = centroid(spec);
  f.inertia = moment_of_inertia(spec, f.centroid);
  f.is_convex = is_convex(spec);
  f.hardy = hardy_constant(spec);

  const ShellVolume shells(spec, f.inradius, options.hq_divisor);
  const SigmaSearch search = minimize_shell_ratio(shells, f.inradius);
  f.sigma = search.sigma;
  f.sigma_beta = search.beta;
  f.quadrature = shells.quadrature();
  f.sigma_error_estimate = f.quadrature.spacing * f.perimeter / search.beta;
  return f;
}

double sigma_convex_identity_gap(const DomainSpec& spec, const GeometricFunctionals& f) {
  if (!is_convex(spec)) throw Error(ErrorKind::not_convex, "domain '" + spec.label + "' is not convex");
  const double target = f.volume / f.inradius;
  return std::abs(f.sigma - target) / target;
}

double sigma_convex_identity_gap(const DomainSpec& spec, FunctionalOptions options) {
  if (!is_convex(spec)) throw Error(ErrorKind::not_convex, "domain '" + spec.label + "' is not convex");
  return sigma_convex_identity_gap(spec, compute_functionals(spec, options));
}

bool isoperimetric_inertia_check(const GeometricFunctionals& f) {
  const int d = f.dimension;
  // Radius of the ball with the same volume.
  const double unit_ball = std::pow(kPi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
  const double r = std::pow(f.volume / unit_ball, 1.0 / d);
  const double ball_inertia = static_cast<double>(d) / (d + 2) * f.volume * r * r;
  // Equality holds for balls; allow roundoff there.
  return f.inertia >= ball_inertia * (1.0 - 1e-12);
}

bool isoperimetric_inertia_check(const DomainSpec& spec) {
  validate(spec);
  GeometricFunctionals f;
  f.dimension = spec.dimension();
  f.volume = volume(spec);
  f.inertia = moment_of_inertia(spec, centroid(spec));
  return isoperimetric_inertia_check(f);
}

}  // namespace spectrolab
