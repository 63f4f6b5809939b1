// spectrolab: geometry, spectrum, verify, sweep, plot-data.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spectrolab/bounds.hpp"
#include "spectrolab/catalog.hpp"
#include "spectrolab/eigensolver.hpp"
#include "spectrolab/error.hpp"
#include "spectrolab/geometry.hpp"
#include "spectrolab/harness.hpp"
#include "spectrolab/operators.hpp"

namespace sl = spectrolab;

namespace {

constexpr int kExitFail = 1;   // a fail verdict
constexpr int kExitError = 2;  // bad input or a library error

sl::Catalog open_catalog(const std::string& path) {
  if (path.empty() || path == "default") return sl::default_catalog();
  return sl::load_catalog(path);
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    sl::write_file_atomic(out, text);
  }
}

sl::LambdaGrid parse_lambda_grid(const std::string& s) {
  // lo:hi:count, multiples of lambda_1
  sl::LambdaGrid g;
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 3) throw sl::Error(sl::ErrorKind::invalid_argument, "--Lambda-grid expects lo:hi:count");
  try {
    g.lo = std::stod(parts[0]);
    g.hi = std::stod(parts[1]);
    g.count = std::stoi(parts[2]);
  } catch (const std::exception&) {
    throw sl::Error(sl::ErrorKind::invalid_argument, "--Lambda-grid expects numbers lo:hi:count");
  }
  return g;
}

struct GeometryArgs {
  std::string catalog;
  std::string domain;
  int hq_divisor = 512;
};

int cmd_geometry(const GeometryArgs& a) {
  const sl::Catalog cat = open_catalog(a.catalog);
  std::vector<std::string> filter;
  if (!a.domain.empty()) filter.push_back(a.domain);
  std::string out = "label,volume,inradius,sigma,inertia,hardy,convex\n";
  for (const auto& spec : cat.select(filter)) {
    const auto f = sl::compute_functionals(spec, {a.hq_divisor});
    out += f.label + ',' + sl::format_number(f.volume) + ',' + sl::format_number(f.inradius) + ',' +
           sl::format_number(f.sigma) + ',' + sl::format_number(f.inertia) + ',' + sl::format_number(f.hardy) + ',' +
           (f.is_convex ? "true" : "false") + '\n';
  }
  std::cout << out;
  return 0;
}

struct SpectrumArgs {
  std::string catalog;
  std::string domain;
  int k = 64;
  double field = 0.0;
  double h = 0.01;
  double tol = 1e-8;
  std::uint64_t seed = 0x5eed;
  std::string out;
  std::string dump_matrix;
  bool no_guard = false;
};

int cmd_spectrum(const SpectrumArgs& a) {
  const sl::Catalog cat = open_catalog(a.catalog);
  const sl::DomainSpec& spec = cat.find(a.domain);
  const auto grid = sl::rasterize(spec, a.h, a.no_guard ? sl::SpacingGuard::off : sl::SpacingGuard::enforce);
  const auto op = a.field == 0.0 ? sl::assemble_dirichlet(grid) : sl::assemble_magnetic(grid, a.field);
  if (!a.dump_matrix.empty()) sl::write_coordinate_list(op, a.dump_matrix);
  sl::SolverOptions o;
  o.tol = a.tol;
  o.seed = a.seed;
  const auto r = sl::lowest_eigenpairs(op, a.k, o);
  std::string csv = "index,eigenvalue,residual\n";
  for (std::size_t j = 0; j < r.eigenvalues.size(); ++j) {
    csv += std::to_string(j + 1) + ',' + sl::format_number(r.eigenvalues[j]) + ',' +
           sl::format_number(r.residuals[j]) + '\n';
  }
  emit(csv, a.out);
  if (!r.converged) {
    std::cerr << "warning: " << r.k_converged << " of " << r.k_requested << " eigenpairs converged\n";
    return kExitError;
  }
  return 0;
}

struct VerifyArgs {
  std::string catalog;
  std::vector<std::string> domains;
  std::vector<std::string> inequalities;
  int N_max = 200;
  std::string lambda_grid;
  std::vector<double> fields{0.0};
  std::vector<double> grids;
  std::vector<double> gammas;
  int k_limit = 400;
  bool fd = false;
  double tol = 1e-8;
  std::uint64_t seed = 0x5eed;
  std::string out;
  bool append = false;
};

int cmd_verify(const VerifyArgs& a) {
  sl::ExperimentPlan plan;
  const sl::Catalog cat = open_catalog(a.catalog);
  for (const auto& id : a.inequalities) {
    if (id == "all") {
      plan.inequalities.clear();
      break;
    }
    plan.inequalities.push_back(sl::inequality_from_string(id));
  }
  plan.N_max = a.N_max;
  if (!a.lambda_grid.empty()) plan.Lambda_grid = parse_lambda_grid(a.lambda_grid);
  plan.fields = a.fields;
  if (!a.grids.empty()) plan.grids = a.grids;
  if (!a.gammas.empty()) plan.gammas = a.gammas;
  plan.k_limit = a.k_limit;
  plan.analytic = !a.fd;
  plan.tol = a.tol;
  plan.seed = a.seed;
  // Same validation as a plan file.
  plan = sl::plan_from_json(sl::plan_to_json(plan));

  std::string csv = a.append ? std::string{} : sl::report_csv_header();
  bool any_fail = false;
  for (const auto& spec : cat.select(a.domains)) {
    for (double b : plan.fields) {
      const auto ev = sl::evaluate_domain(spec, b, plan);
      for (const auto& n : ev.notes) std::cerr << spec.label << " B=" << b << ": " << n << '\n';
      for (const auto& r : ev.reports) {
        csv += sl::report_csv_row(r);
        any_fail = any_fail || r.verdict == sl::Verdict::fail;
      }
    }
  }
  if (a.append && !a.out.empty() && a.out != "-") {
    std::ifstream probe(a.out);
    std::string existing;
    if (probe) {
      std::ostringstream ss;
      ss << probe.rdbuf();
      existing = ss.str();
    }
    if (existing.empty()) existing = sl::report_csv_header();
    sl::write_file_atomic(a.out, existing + csv);
  } else {
    emit(csv, a.out);
  }
  return any_fail ? kExitFail : 0;
}

struct SweepArgs {
  std::string plan_path;
  std::optional<std::uint64_t> seed;
  std::string output_dir;
  int workers = 0;
};

int cmd_sweep(const SweepArgs& a) {
  sl::ExperimentPlan plan = sl::load_plan(a.plan_path);
  if (a.seed) plan.seed = *a.seed;
  if (!a.output_dir.empty()) plan.output_dir = a.output_dir;
  const auto manifest = sl::run(plan, a.workers);
  int completed = 0;
  int skipped = 0;
  for (const auto& t : manifest.tasks) {
    if (t.status == sl::TaskStatus::completed) ++completed;
    if (t.status == sl::TaskStatus::skipped) ++skipped;
    if (t.status == sl::TaskStatus::failed) std::cerr << t.id << ": " << t.message << '\n';
  }
  const auto rows = sl::read_report_csv(plan.output_dir + "/report.csv");
  int fails = 0;
  int indeterminate = 0;
  for (const auto& r : rows) {
    if (r.verdict == "fail") ++fails;
    if (r.verdict == "indeterminate") ++indeterminate;
  }
  std::printf("plan %s: %d completed, %d skipped, %d failed tasks; %zu rows, %d fail, %d indeterminate\n",
              manifest.plan_hash.c_str(), completed, skipped, manifest.failed_tasks(), rows.size(), fails,
              indeterminate);
  if (manifest.failed_tasks() > 0) return kExitError;
  return fails > 0 ? kExitFail : 0;
}

struct PlotArgs {
  std::string report;
  std::string kind;
  std::string out;
  std::string domain;
  std::string inequality;
  std::optional<double> field;
  std::optional<double> gamma;
  std::optional<double> reference;
};

int cmd_plot(const PlotArgs& a) {
  sl::PlotFilter f;
  f.domain = a.domain;
  if (!a.inequality.empty()) f.inequality = a.inequality;
  f.field = a.field;
  f.gamma = a.gamma;
  f.reference = a.reference;
  std::cout << sl::emit_plot_data(a.report, sl::plot_kind_from_string(a.kind), a.out, f) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral geometry bounds: geometry, spectra and inequality checks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SPECTROLAB_VERSION);

  GeometryArgs g;
  auto* geo = app.add_subcommand("geometry", "Geometric functionals, one CSV row per domain");
  geo->add_option("catalog", g.catalog, "catalog JSON, or 'default'");
  geo->add_option("--domain", g.domain, "only this label");
  geo->add_option("--hq-divisor", g.hq_divisor, "shell quadrature: h_q = inradius / divisor")->check(CLI::PositiveNumber);

  SpectrumArgs s;
  auto* spec = app.add_subcommand("spectrum", "Lowest finite-difference eigenvalues of one domain");
  spec->set_help_flag("--help", "Print this help message and exit");  // frees the name h
  spec->add_option("catalog", s.catalog, "catalog JSON, or 'default'");
  spec->add_option("--domain", s.domain, "domain label")->required();
  spec->add_option("--k", s.k, "number of eigenvalues")->check(CLI::PositiveNumber);
  spec->add_option("--field", s.field, "constant magnetic field B");
  spec->add_option("--h", s.h, "grid spacing")->check(CLI::PositiveNumber);
  spec->add_option("--tol", s.tol, "residual tolerance relative to the operator norm");
  spec->add_option("--seed", s.seed, "random seed");
  spec->add_option("--out", s.out, "CSV path (stdout by default)");
  spec->add_option("--dump-matrix", s.dump_matrix, "write the matrix as row,col,re,im lines");
  spec->add_flag("--no-spacing-guard", s.no_guard, "allow h >= inradius/4");

  VerifyArgs v;
  auto* ver = app.add_subcommand("verify", "Check inequalities on catalog domains");
  ver->add_option("catalog", v.catalog, "catalog JSON, or 'default'");
  ver->add_option("--domain", v.domains, "labels (repeatable)");
  ver->add_option("--inequality", v.inequalities, "ids or 'all' (repeatable)");
  ver->add_option("--N-max", v.N_max, "largest N for eigenvalue sums")->check(CLI::PositiveNumber);
  ver->add_option("--Lambda-grid", v.lambda_grid, "lo:hi:count in multiples of lambda_1");
  ver->add_option("--field", v.fields, "field values B (repeatable)");
  ver->add_option("--grid", v.grids, "grid spacing; give two for Richardson extrapolation");
  ver->add_option("--gamma", v.gammas, "Riesz exponents for the Berezin rows");
  ver->add_option("--k-limit", v.k_limit, "cap on eigenvalues per grid")->check(CLI::PositiveNumber);
  ver->add_flag("--fd", v.fd, "finite differences even where a closed form exists");
  ver->add_option("--tol", v.tol, "solver tolerance");
  ver->add_option("--seed", v.seed, "random seed");
  ver->add_option("--out", v.out, "report CSV path (stdout by default)");
  ver->add_flag("--append", v.append, "append rows to an existing report");

  SweepArgs w;
  auto* sw = app.add_subcommand("sweep", "Run an experiment plan");
  sw->add_option("plan", w.plan_path, "plan JSON")->required();
  sw->add_option("--seed", w.seed, "override the plan seed");
  sw->add_option("--output-dir", w.output_dir, "override the plan output directory");
  sw->add_option("--workers", w.workers, "worker threads (default: SPECTROLAB_WORKERS or 1)");

  PlotArgs p;
  auto* pl = app.add_subcommand("plot-data", "Extract plotting columns from a report");
  pl->add_option("report", p.report, "report CSV")->required();
  pl->add_option("--kind", p.kind, "slack_vs_N, slack_vs_Lambda or convergence")->required();
  pl->add_option("--out", p.out, "output CSV");
  pl->add_option("--domain", p.domain, "domain label");
  pl->add_option("--inequality", p.inequality, "inequality id");
  pl->add_option("--field", p.field, "field value B");
  pl->add_option("--gamma", p.gamma, "Riesz exponent");
  pl->add_option("--reference", p.reference, "exact lambda_1 for the convergence errors");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*geo) return cmd_geometry(g);
    if (*spec) return cmd_spectrum(s);
    if (*ver) return cmd_verify(v);
    if (*sw) return cmd_sweep(w);
    if (*pl) return cmd_plot(p);
  } catch (const sl::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
