#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spectrolab/bounds.hpp"
#include "spectrolab/catalog.hpp"
#include "spectrolab/eigensolver.hpp"
#include "spectrolab/error.hpp"
#include "spectrolab/geometry.hpp"
#include "spectrolab/harness.hpp"
#include "spectrolab/operators.hpp"
#include "spectrolab/spectra.hpp"

namespace py = pybind11;
using namespace spectrolab;

namespace {

std::vector<Vec2> to_vertices(const std::vector<std::pair<double, double>>& pts) {
  std::vector<Vec2> out;
  out.reserve(pts.size());
  for (const auto& [x, y] : pts) out.push_back({x, y});
  return out;
}

std::vector<std::pair<double, double>> from_vertices(const std::vector<Vec2>& v) {
  std::vector<std::pair<double, double>> out;
  for (const auto& p : v) out.emplace_back(p.x, p.y);
  return out;
}

// JSON crosses the boundary as text; the Python side wraps json.dumps/loads.
nlohmann::json parse(const std::string& text) { return nlohmann::json::parse(text); }

}  // namespace

PYBIND11_MODULE(_spectrolab, m) {
  m.doc() = "Dirichlet and magnetic Laplacian eigenvalue bounds";
  m.attr("__version__") = SPECTROLAB_VERSION;

  // Messages start with the kind name, e.g. "SpacingTooCoarse: ...".
  py::register_exception<Error>(m, "SpectrolabError", PyExc_RuntimeError);

  // geometry
  py::enum_<DomainKind>(m, "DomainKind")
      .value("rectangle", DomainKind::rectangle)
      .value("disc", DomainKind::disc)
      .value("convex_polygon", DomainKind::convex_polygon)
      .value("polygon", DomainKind::polygon)
      .value("product", DomainKind::product);

  py::class_<DomainSpec>(m, "DomainSpec")
      .def_static("rectangle", &DomainSpec::rectangle, py::arg("a"), py::arg("b"), py::arg("label") = "")
      .def_static("disc", &DomainSpec::disc, py::arg("r"), py::arg("label") = "")
      .def_static(
          "convex_polygon",
          [](const std::vector<std::pair<double, double>>& v, std::string label) {
            return DomainSpec::convex_polygon(to_vertices(v), std::move(label));
          },
          py::arg("vertices"), py::arg("label") = "")
      .def_static(
          "polygon",
          [](const std::vector<std::pair<double, double>>& v, std::string label) {
            return DomainSpec::polygon(to_vertices(v), std::move(label));
          },
          py::arg("vertices"), py::arg("label") = "")
      .def_static("product", &DomainSpec::product, py::arg("interval"), py::arg("base"), py::arg("label") = "")
      .def_readonly("kind", &DomainSpec::kind)
      .def_readwrite("label", &DomainSpec::label)
      .def_readwrite("hardy_override", &DomainSpec::hardy_override)
      .def_readonly("width", &DomainSpec::width)
      .def_readonly("height", &DomainSpec::height)
      .def_readonly("radius", &DomainSpec::radius)
      .def_readonly("interval", &DomainSpec::interval)
      .def_property_readonly("vertices", [](const DomainSpec& d) { return from_vertices(d.vertices); })
      .def_property_readonly("dimension", &DomainSpec::dimension)
      .def("scaled", &DomainSpec::scaled, py::arg("t"))
      .def("to_json", [](const DomainSpec& d) { return domain_to_json(d).dump(); })
      .def("__repr__", [](const DomainSpec& d) { return "<DomainSpec " + to_string(d.kind) + " '" + d.label + "'>"; });

  m.def("domain_from_json", [](const std::string& text) { return domain_from_json(parse(text)); });
  m.def("validate", &validate);
  m.def("volume", &volume);
  m.def("perimeter", &perimeter);
  m.def("inradius", &inradius);
  m.def("centroid", &centroid);
  m.def("is_convex", &is_convex);
  m.def("hardy_constant", &hardy_constant);
  m.def("boundary_distance", &boundary_distance, py::arg("spec"), py::arg("x"));

  py::enum_<SpacingGuard>(m, "SpacingGuard").value("enforce", SpacingGuard::enforce).value("off", SpacingGuard::off);

  py::class_<GridDomain>(m, "GridDomain")
      .def_readonly("spacing", &GridDomain::spacing)
      .def_readonly("dim", &GridDomain::dim)
      .def_property_readonly("point_count", &GridDomain::point_count)
      .def_property_readonly("coordinates",
                             [](const GridDomain& g) {
                               py::array_t<double> out({static_cast<py::ssize_t>(g.point_count()), py::ssize_t{3}});
                               auto a = out.mutable_unchecked<2>();
                               for (std::size_t i = 0; i < g.point_count(); ++i) {
                                 const Point p = g.coordinates(i);
                                 for (int c = 0; c < 3; ++c) a(static_cast<py::ssize_t>(i), c) = p[static_cast<std::size_t>(c)];
                               }
                               return out;
                             })
      .def_property_readonly("distance", [](const GridDomain& g) { return py::array_t<double>(g.distance.size(), g.distance.data()); });

  m.def("rasterize", &rasterize, py::arg("spec"), py::arg("h"), py::arg("guard") = SpacingGuard::enforce);

  py::class_<GeometricFunctionals>(m, "GeometricFunctionals")
      .def_readonly("dimension", &GeometricFunctionals::dimension)
      .def_readonly("volume", &GeometricFunctionals::volume)
      .def_readonly("perimeter", &GeometricFunctionals::perimeter)
      .def_readonly("inradius", &GeometricFunctionals::inradius)
      .def_readonly("sigma", &GeometricFunctionals::sigma)
      .def_readonly("sigma_beta", &GeometricFunctionals::sigma_beta)
      .def_readonly("inertia", &GeometricFunctionals::inertia)
      .def_readonly("centroid", &GeometricFunctionals::centroid)
      .def_readonly("hardy", &GeometricFunctionals::hardy)
      .def_readonly("is_convex", &GeometricFunctionals::is_convex)
      .def_readonly("label", &GeometricFunctionals::label);

  m.def(
      "compute_functionals",
      [](const DomainSpec& spec, int hq_divisor) { return compute_functionals(spec, FunctionalOptions{hq_divisor}); },
      py::arg("spec"), py::arg("hq_divisor") = 512);

  // operators
  py::class_<LinearOperatorMatrix>(m, "LinearOperatorMatrix")
      .def_readonly("entries", &LinearOperatorMatrix::entries)
      .def_readonly("spacing", &LinearOperatorMatrix::spacing)
      .def_readonly("field", &LinearOperatorMatrix::field)
      .def_readonly("dim", &LinearOperatorMatrix::dim)
      .def_readonly("gauge_tag", &LinearOperatorMatrix::gauge_tag)
      .def_property_readonly("dimension", &LinearOperatorMatrix::dimension)
      .def("is_real", &LinearOperatorMatrix::is_real)
      .def("norm_estimate", &LinearOperatorMatrix::norm_estimate);

  m.def("assemble_dirichlet", &assemble_dirichlet, py::arg("grid"));
  m.def("assemble_magnetic", &assemble_magnetic, py::arg("grid"), py::arg("field"));
  m.def(
      "gauge_transform",
      [](const LinearOperatorMatrix& op, const std::vector<double>& chi) { return gauge_transform(op, chi); },
      py::arg("op"), py::arg("chi"));
  m.def("is_exactly_hermitian", &is_exactly_hermitian);

  // eigensolver
  py::enum_<SolverMethod>(m, "SolverMethod")
      .value("automatic", SolverMethod::automatic)
      .value("iterative", SolverMethod::iterative)
      .value("dense", SolverMethod::dense);

  py::class_<SolverOptions>(m, "SolverOptions")
      .def(py::init<>())
      .def_readwrite("tol", &SolverOptions::tol)
      .def_readwrite("max_iterations", &SolverOptions::max_iterations)
      .def_readwrite("seed", &SolverOptions::seed)
      .def_readwrite("block_size", &SolverOptions::block_size)
      .def_readwrite("method", &SolverOptions::method)
      .def_readwrite("keep_vectors", &SolverOptions::keep_vectors)
      .def_readwrite("cover_multiple", &SolverOptions::cover_multiple)
      .def_readwrite("k_limit", &SolverOptions::k_limit);

  py::class_<SpectralResult>(m, "SpectralResult")
      .def_readonly("eigenvalues", &SpectralResult::eigenvalues)
      .def_readonly("residuals", &SpectralResult::residuals)
      .def_readonly("k_requested", &SpectralResult::k_requested)
      .def_readonly("k_converged", &SpectralResult::k_converged)
      .def_readonly("iterations", &SpectralResult::iterations)
      .def_readonly("tolerance", &SpectralResult::tolerance)
      .def_readonly("converged", &SpectralResult::converged)
      .def_readonly("vectors", &SpectralResult::vectors)
      .def("count_below", &SpectralResult::count_below);

  m.def("lowest_eigenpairs", &lowest_eigenpairs, py::arg("op"), py::arg("k"), py::arg("options") = SolverOptions{});
  m.def("dense_spectrum", &dense_spectrum, py::arg("op"), py::arg("keep_vectors") = false);
  m.def("fractional_apply", &fractional_apply, py::arg("op"), py::arg("exponent"), py::arg("v"));

  // analytic spectra
  m.def("bessel_zero", &bessel_zero);
  m.def("rectangle_eigenvalues", &rectangle_eigenvalues, py::arg("a"), py::arg("b"), py::arg("count"));
  m.def("disc_eigenvalues", &disc_eigenvalues, py::arg("r"), py::arg("count"));
  m.def("analytic_eigenvalues", &analytic_eigenvalues, py::arg("spec"), py::arg("count"));

  py::enum_<SpectrumSource>(m, "SpectrumSource")
      .value("analytic", SpectrumSource::analytic)
      .value("finite_difference", SpectrumSource::finite_difference)
      .value("extrapolated", SpectrumSource::extrapolated);

  py::class_<SpectrumEstimate>(m, "SpectrumEstimate")
      .def_readonly("eigenvalues", &SpectrumEstimate::eigenvalues)
      .def_readonly("bias", &SpectrumEstimate::bias)
      .def_readonly("solver_tolerance", &SpectrumEstimate::solver_tolerance)
      .def_readonly("field", &SpectrumEstimate::field)
      .def_readonly("spacing", &SpectrumEstimate::spacing)
      .def_readonly("source", &SpectrumEstimate::source);

  m.def("analytic_spectrum", &analytic_spectrum, py::arg("eigenvalues"), py::arg("field") = 0.0);
  m.def("finite_difference_spectrum", &finite_difference_spectrum, py::arg("result"), py::arg("grid_aligned"),
        py::arg("inradius"));
  m.def("richardson_spectrum", &richardson_spectrum, py::arg("coarse"), py::arg("fine"), py::arg("grid_aligned"),
        py::arg("inradius"), py::arg("order") = 2);

  // bounds
  py::enum_<InequalityId> ids(m, "InequalityId");
  for (InequalityId id : all_inequalities()) ids.value(std::string(to_string(id)).c_str(), id);

  py::class_<BoundReport>(m, "BoundReport")
      .def_property_readonly("inequality_id", [](const BoundReport& r) { return std::string(to_string(r.inequality_id)); })
      .def_readonly("lhs", &BoundReport::lhs)
      .def_readonly("rhs", &BoundReport::rhs)
      .def_readonly("slack", &BoundReport::slack)
      .def_readonly("tolerance_budget", &BoundReport::tolerance_budget)
      .def_property_readonly("verdict", [](const BoundReport& r) { return std::string(to_string(r.verdict)); })
      .def_readonly("parameter", &BoundReport::parameter)
      .def_readonly("field", &BoundReport::field)
      .def_readonly("gamma", &BoundReport::gamma)
      .def_readonly("spacing", &BoundReport::spacing)
      .def_readonly("domain", &BoundReport::domain);

  m.def("classify", [](double slack, double budget) { return std::string(to_string(classify(slack, budget))); });

  py::enum_<LiYauVariant>(m, "LiYauVariant")
      .value("classical", LiYauVariant::classical)
      .value("melas", LiYauVariant::melas)
      .value("improved", LiYauVariant::improved)
      .value("convex", LiYauVariant::convex);
  py::enum_<MagneticVariant>(m, "MagneticVariant")
      .value("improved", MagneticVariant::improved)
      .value("convex", MagneticVariant::convex);
  py::enum_<BerezinVariant>(m, "BerezinVariant")
      .value("berezin", BerezinVariant::berezin)
      .value("excess", BerezinVariant::excess)
      .value("improved", BerezinVariant::improved)
      .value("magnetic_improved", BerezinVariant::magnetic_improved)
      .value("davies_improved", BerezinVariant::davies_improved)
      .value("davies_convex", BerezinVariant::davies_convex);

  m.def("semiclassical_constant", &semiclassical_constant, py::arg("gamma"), py::arg("d"));
  m.def("liyau_constant", &liyau_constant, py::arg("d"));
  m.def("melas_constant", &melas_constant, py::arg("d"));
  m.def("liyau_rhs", py::overload_cast<int, const GeometricFunctionals&, LiYauVariant>(&liyau_rhs), py::arg("N"),
        py::arg("functionals"), py::arg("variant"));
  m.def("magnetic_liyau_rhs", &magnetic_liyau_rhs, py::arg("N"), py::arg("functionals"), py::arg("variant"));
  m.def("berezin_rhs", &berezin_rhs, py::arg("Lambda"), py::arg("gamma"), py::arg("functionals"), py::arg("variant"),
        py::arg("field") = 0.0);
  m.def("riesz_mean", [](const std::vector<double>& ev, double Lambda, double gamma) { return riesz_mean(ev, Lambda, gamma); },
        py::arg("eigenvalues"), py::arg("Lambda"), py::arg("gamma"));

  py::class_<LandauCount>(m, "LandauCount")
      .def_readonly("Lambda", &LandauCount::Lambda)
      .def_readonly("B", &LandauCount::B)
      .def_readonly("M", &LandauCount::M)
      .def_readonly("m", &LandauCount::m)
      .def_readonly("partial_sum", &LandauCount::partial_sum)
      .def_readonly("direct_sum", &LandauCount::direct_sum);
  m.def("landau_partial_sum", &landau_partial_sum, py::arg("Lambda"), py::arg("B"));

  m.def(
      "legendre_duality_check",
      [](const GeometricFunctionals& f, const std::vector<int>& samples, bool magnetic) {
        return legendre_duality_check(f, samples, magnetic ? LegendrePairing::magnetic : LegendrePairing::dirichlet);
      },
      py::arg("functionals"), py::arg("N_samples"), py::arg("magnetic") = false);

  py::class_<WeylFit>(m, "WeylFit")
      .def_readonly("coefficient", &WeylFit::coefficient)
      .def_readonly("normalized", &WeylFit::normalized);
  m.def(
      "weyl_secondterm_fit",
      [](const std::vector<double>& ev, const GeometricFunctionals& f, int lo, int hi) {
        return weyl_secondterm_fit(ev, f, lo, hi);
      },
      py::arg("eigenvalues"), py::arg("functionals"), py::arg("N_lo"), py::arg("N_hi"));

  m.def(
      "verify_inequality",
      [](const std::string& id, const SpectrumEstimate& s, const GeometricFunctionals* f, int N, double Lambda,
         double gamma, double field, const std::string& domain) {
        VerifyParams p;
        p.N = N;
        p.Lambda = Lambda;
        p.gamma = gamma;
        p.field = field;
        p.domain = domain;
        return verify_inequality(inequality_from_string(id), s, f, p);
      },
      py::arg("inequality"), py::arg("spectrum"), py::arg("functionals") = nullptr, py::arg("N") = 1,
      py::arg("Lambda") = 0.0, py::arg("gamma") = 1.0, py::arg("field") = 0.0, py::arg("domain") = "");

  // catalog and harness
  m.def("default_catalog", [] { return default_catalog().domains; });
  m.def("load_catalog", [](const std::string& path) { return load_catalog(path).domains; });
  m.def("plan_hash", [](const std::string& plan) { return plan_hash(plan_from_json(parse(plan))); });
  m.def("normalize_plan", [](const std::string& plan) { return plan_to_json(plan_from_json(parse(plan))).dump(); });
  m.def(
      "evaluate_domain",
      [](const DomainSpec& spec, double field, const std::string& plan) {
        return evaluate_domain(spec, field, plan_from_json(parse(plan))).reports;
      },
      py::arg("spec"), py::arg("field"), py::arg("plan"));
  m.def(
      "run",
      [](const std::string& plan, int workers) {
        const auto parsed = plan_from_json(parse(plan));
        RunManifest manifest;
        {
          py::gil_scoped_release release;
          manifest = run(parsed, workers);
        }
        return manifest.to_json().dump();
      },
      py::arg("plan"), py::arg("workers") = 0);
  m.def(
      "emit_plot_data",
      [](const std::string& report, const std::string& kind, const std::string& out, const std::string& domain,
         std::optional<std::string> inequality, std::optional<double> field, std::optional<double> gamma,
         std::optional<double> reference) {
        PlotFilter filter{domain, std::move(inequality), field, gamma, reference};
        return emit_plot_data(report, plot_kind_from_string(kind), out, filter);
      },
      py::arg("report"), py::arg("kind"), py::arg("out") = "", py::arg("domain") = "",
      py::arg("inequality") = py::none(), py::arg("field") = py::none(), py::arg("gamma") = py::none(),
      py::arg("reference") = py::none());
}
