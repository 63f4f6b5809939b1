#pragma once

// Bounded domains, boundary distance, rasterization and the geometric
// functionals (volume, in-radius, sigma, moment of inertia, Hardy constant).

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace spectrolab {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Points carry up to three coordinates; unused trailing entries are zero.
using Point = std::array<double, 3>;

enum class DomainKind { rectangle, disc, convex_polygon, polygon, product };

std::string to_string(DomainKind kind);
DomainKind domain_kind_from_string(const std::string& name);

/// Geometric description of a bounded open domain.
///
/// Placement conventions: rectangles occupy [0,a]x[0,b], discs are centred at
/// the origin, polygons use their vertex coordinates verbatim, and a product
/// places its planar base in (x, y) and the interval (0, L) along z.
struct DomainSpec {
  DomainKind kind = DomainKind::rectangle;
  double width = 0.0;   // rectangle
  double height = 0.0;  // rectangle
  double radius = 0.0;  // disc
  std::vector<Vec2> vertices;                // polygon kinds
  double interval = 0.0;                     // product
  std::shared_ptr<const DomainSpec> base;    // product
  std::optional<double> hardy_override;
  std::string label;

  static DomainSpec rectangle(double a, double b, std::string label = {});
  static DomainSpec disc(double r, std::string label = {});
  static DomainSpec convex_polygon(std::vector<Vec2> vertices, std::string label = {});
  static DomainSpec polygon(std::vector<Vec2> vertices, std::string label = {});
  static DomainSpec product(double interval, DomainSpec base, std::string label = {});

  int dimension() const { return kind == DomainKind::product ? 3 : 2; }

  /// The dilated domain t*Omega (all lengths multiplied by t).
  DomainSpec scaled(double t) const;
};

/// Throws `Error` (invalid_domain, non_simple_polygon, not_convex,
/// degenerate_domain) when the domain violates its invariants.
void validate(const DomainSpec& spec);

struct BoundingBox {
  Point lo{};
  Point hi{};
};

BoundingBox bounding_box(const DomainSpec& spec);

/// Exact Euclidean distance from x to the boundary; 0 outside the closure.
double boundary_distance(const DomainSpec& spec, const Point& x);

bool polygon_is_convex(const std::vector<Vec2>& vertices);
bool polygon_is_simple(const std::vector<Vec2>& vertices);
bool is_convex(const DomainSpec& spec);

double volume(const DomainSpec& spec);
double perimeter(const DomainSpec& spec);
Point centroid(const DomainSpec& spec);

/// Second moment of the domain about the point a: int |x - a|^2 dx.
double moment_of_inertia(const DomainSpec& spec, const Point& a);

/// Largest inscribed ball radius. Exact for rectangles and discs; for
/// polygons a grid maximisation of the edge distance followed by a compass
/// search polish.
double inradius(const DomainSpec& spec);

/// Returns the override when set, 4 for convex domains, 16 for simply
/// connected planar domains. Throws hardy_unknown otherwise.
double hardy_constant(const DomainSpec& spec);

// ---------------------------------------------------------------------------
// Rasterization

enum class SpacingGuard { enforce, off };

/// Lattice points h*Z^d strictly interior to the domain.
struct GridDomain {
  double spacing = 0.0;
  int dim = 2;
  BoundingBox bounding_box;
  std::array<long, 3> lattice_lo{};      // smallest lattice index per axis
  std::array<long, 3> lattice_extent{};  // number of lattice indices per axis
  std::vector<std::int32_t> index_map;   // dense over the extent, -1 = exterior
  std::vector<std::array<long, 3>> lattice;  // lattice coordinates per point
  std::vector<double> distance;              // exact delta(x) per point

  std::size_t point_count() const { return lattice.size(); }
  Point coordinates(std::size_t i) const;
  /// Index of the lattice point, or -1 when it is not interior.
  std::int32_t index_of(const std::array<long, 3>& ijk) const;
};

/// Errors: empty_grid when no lattice point is interior; spacing_too_coarse
/// when h >= inradius/4 and the guard is enforced.
GridDomain rasterize(const DomainSpec& spec, double h, SpacingGuard guard = SpacingGuard::enforce);

// ---------------------------------------------------------------------------
// Functionals

struct ShellQuadrature {
  double spacing = 0.0;  // h_q
  std::size_t cells = 0;
  std::size_t interior_cells = 0;
};

struct GeometricFunctionals {
  int dimension = 2;
  double volume = 0.0;
  double perimeter = 0.0;
  double inradius = 0.0;
  double sigma = 0.0;
  double sigma_beta = 0.0;            // minimiser found by the search
  double sigma_error_estimate = 0.0;  // h_q * |boundary| / beta, a crude bound
  double inertia = 0.0;
  Point centroid{};
  double hardy = 4.0;
  bool is_convex = false;
  ShellQuadrature quadrature;
  std::string label;
};

struct FunctionalOptions {
  int hq_divisor = 512;  // h_q = inradius / hq_divisor
};

/// Cumulative shell volume beta -> |Omega_beta| on a cell-centred grid. The
/// cell count of {delta < t} is averaged over t in [beta - h_q/2, beta + h_q/2],
/// which removes the staircase of the raw count near straight edges.
class ShellVolume {
 public:
  ShellVolume(const DomainSpec& spec, double inradius, int hq_divisor);

  /// |{x : delta(x) < beta}|; nondecreasing in beta.
  double operator()(double beta) const;

  double total() const;
  const ShellQuadrature& quadrature() const { return quadrature_; }

 private:
  double planar_measure_below(double beta) const;
  double count_integral(double t) const;  // int_0^t #{delta < s} ds

  static constexpr std::size_t kBins = std::size_t{1} << 20;
  std::vector<std::uint64_t> cumulative_;  // cells with delta < bin edge
  std::vector<double> integral_;           // count_integral at bin edges
  double bin_width_ = 0.0;
  double cell_measure_ = 0.0;
  double interval_ = 0.0;  // product domains only
  double base_volume_ = 0.0;
  ShellQuadrature quadrature_;
};

struct SigmaSearch {
  double sigma = 0.0;
  double beta = 0.0;
};

/// Minimises |Omega_beta|/beta: 64 log-spaced candidates followed by a
/// golden-section refinement around the best one.
SigmaSearch minimize_shell_ratio(const ShellVolume& shells, double inradius);

GeometricFunctionals compute_functionals(const DomainSpec& spec, FunctionalOptions options = {});

/// |sigma - |Omega|/R_i| / (|Omega|/R_i). Throws not_convex.
double sigma_convex_identity_gap(const DomainSpec& spec, FunctionalOptions options = {});
double sigma_convex_identity_gap(const DomainSpec& spec, const GeometricFunctionals& f);

/// I(Omega) >= d/(d+2) |Omega| R^2 with R the radius of the equal-area disc.
bool isoperimetric_inertia_check(const DomainSpec& spec);
bool isoperimetric_inertia_check(const GeometricFunctionals& f);

}  // namespace spectrolab
