#include "spectrolab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "spectrolab/eigensolver.hpp"
#include "spectrolab/error.hpp"
#include "spectrolab/operators.hpp"

#ifndef SPECTROLAB_VERSION
#define SPECTROLAB_VERSION "0.0.0"
#endif

namespace spectrolab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kWorkersVariable = "SPECTROLAB_WORKERS";
// Analytic spectra are cheap, but an unbounded loop is not.
constexpr std::size_t kAnalyticCap = std::size_t{1} << 20;
constexpr int kWeylMinimum = 500;
constexpr int kWeylTarget = 2000;

bool is_sum_id(InequalityId id) {
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

bool is_gamma_family(InequalityId id) {
  return id == InequalityId::weyl_leading || id == InequalityId::berezin || id == InequalityId::berezin_excess;
}

bool is_gamma_one_riesz(InequalityId id) {
  switch (id) {
    case InequalityId::berezin_improved:
    case InequalityId::magnetic_berezin_improved:
    case InequalityId::davies_improved:
    case InequalityId::davies_convex:
      return true;
    default:
      return false;
  }
}

bool wants(const ExperimentPlan& plan, InequalityId id) {
  return plan.inequalities.empty() ||
         std::find(plan.inequalities.begin(), plan.inequalities.end(), id) != plan.inequalities.end();
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

Catalog plan_catalog(const ExperimentPlan& plan) {
  return plan.catalog_path.empty() ? default_catalog() : load_catalog(plan.catalog_path);
}

std::string hash_with_catalog(const ExperimentPlan& plan, const Catalog& catalog) {
  json doc = plan_to_json(plan);
  doc.erase("output_dir");  // where results go does not change them
  doc.erase("catalog");
  doc["catalog_content"] = catalog_to_json(catalog);
  doc["version"] = SPECTROLAB_VERSION;
  return hex16(fnv1a(doc.dump()));
}

std::vector<double> number_list(const json& v, const char* key) {
  if (!v.is_array()) throw Error(ErrorKind::invalid_argument, std::string("plan '") + key + "' must be an array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw Error(ErrorKind::invalid_argument, std::string("plan '") + key + "' holds a non-number");
    out.push_back(x.get<double>());
  }
  return out;
}

// Quote a CSV field only when it needs it.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

double parse_number(const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw Error(ErrorKind::invalid_argument, "not a number in report: '" + s + "'");
  }
  return v;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

LinearOperatorMatrix assemble(const GridDomain& g, double field) {
  return field == 0.0 ? assemble_dirichlet(g) : assemble_magnetic(g, field);
}

SolverOptions solver_options(const ExperimentPlan& plan) {
  SolverOptions o;
  o.tol = plan.tol;
  o.seed = plan.seed;
  return o;
}

}  // namespace

// Plans ---------------------------------------------------------------------

std::vector<double> LambdaGrid::multiples() const {
  std::vector<double> out;
  if (count <= 0) return out;
  if (count == 1) return {lo};
  for (int i = 0; i < count; ++i) out.push_back(lo + (hi - lo) * i / (count - 1));
  out.back() = hi;
  return out;
}

std::vector<InequalityId> all_inequalities() {
  return {InequalityId::weyl_leading,        InequalityId::berezin,
          InequalityId::berezin_excess,      InequalityId::liyau_classical,
          InequalityId::melas,               InequalityId::liyau_improved,
          InequalityId::liyau_convex,        InequalityId::magnetic_liyau,
          InequalityId::magnetic_convex,     InequalityId::berezin_improved,
          InequalityId::magnetic_berezin_improved, InequalityId::davies_improved,
          InequalityId::davies_convex,       InequalityId::lambda1_hardy,
          InequalityId::diamagnetic,         InequalityId::landau_identity,
          InequalityId::legendre_duality,    InequalityId::weyl_secondterm_sign};
}

ExperimentPlan plan_from_json(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorKind::invalid_argument, "plan must be a JSON object");
  static const std::set<std::string> known = {"catalog", "domains",  "inequalities", "grids", "fields",
                                              "N_max",   "Lambda_grid", "gammas",    "k_limit", "analytic",
                                              "tol",     "seed",     "output_dir"};
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) throw Error(ErrorKind::invalid_argument, "unknown plan key '" + key + "'");
  }
  ExperimentPlan plan;
  try {
    if (doc.contains("catalog") && !doc.at("catalog").is_null()) plan.catalog_path = doc.at("catalog").get<std::string>();
    if (doc.contains("domains")) plan.domains = doc.at("domains").get<std::vector<std::string>>();
    if (doc.contains("inequalities")) {
      const json& ids = doc.at("inequalities");
      if (ids.is_string()) {
        if (ids.get<std::string>() != "all") plan.inequalities.push_back(inequality_from_string(ids.get<std::string>()));
      } else {
        for (const auto& name : ids) {
          const std::string s = name.get<std::string>();
          if (s == "all") {
            plan.inequalities.clear();
            break;
          }
          plan.inequalities.push_back(inequality_from_string(s));
        }
      }
    }
    if (doc.contains("grids")) plan.grids = number_list(doc.at("grids"), "grids");
    if (doc.contains("fields")) plan.fields = number_list(doc.at("fields"), "fields");
    if (doc.contains("N_max")) plan.N_max = doc.at("N_max").get<int>();
    if (doc.contains("Lambda_grid")) {
      const json& g = doc.at("Lambda_grid");
      plan.Lambda_grid.lo = g.value("lo", plan.Lambda_grid.lo);
      plan.Lambda_grid.hi = g.value("hi", plan.Lambda_grid.hi);
      plan.Lambda_grid.count = g.value("count", plan.Lambda_grid.count);
    }
    if (doc.contains("gammas")) plan.gammas = number_list(doc.at("gammas"), "gammas");
    if (doc.contains("k_limit")) plan.k_limit = doc.at("k_limit").get<int>();
    if (doc.contains("analytic")) plan.analytic = doc.at("analytic").get<bool>();
    if (doc.contains("tol")) plan.tol = doc.at("tol").get<double>();
    if (doc.contains("seed")) plan.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("output_dir")) plan.output_dir = doc.at("output_dir").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::invalid_argument, std::string("malformed plan: ") + e.what());
  }

  if (plan.grids.empty() || plan.grids.size() > 2) {
    throw Error(ErrorKind::invalid_argument, "plan needs one or two grid spacings");
  }
  for (double h : plan.grids) {
    if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorKind::invalid_argument, "grid spacings must be positive");
  }
  if (plan.grids.size() == 2 && plan.grids[0] == plan.grids[1]) {
    throw Error(ErrorKind::invalid_argument, "the two grid spacings must differ");
  }
  if (plan.fields.empty()) throw Error(ErrorKind::invalid_argument, "plan needs at least one field value");
  for (double b : plan.fields) {
    if (!std::isfinite(b)) throw Error(ErrorKind::invalid_argument, "field values must be finite");
  }
  if (plan.N_max < 1) throw Error(ErrorKind::invalid_argument, "N_max must be at least 1");
  const LambdaGrid& g = plan.Lambda_grid;
  if (!(g.lo > 0.0) || !(g.hi >= g.lo) || g.count < 1) {
    throw Error(ErrorKind::invalid_argument, "Lambda_grid needs 0 < lo <= hi and count >= 1");
  }
  for (double gamma : plan.gammas) {
    if (!(gamma >= 0.0)) throw Error(ErrorKind::invalid_gamma, "gammas must be nonnegative");
  }
  if (plan.k_limit < 1) throw Error(ErrorKind::invalid_argument, "k_limit must be at least 1");
  if (!(plan.tol > 0.0)) throw Error(ErrorKind::invalid_argument, "tol must be positive");
  if (plan.output_dir.empty()) throw Error(ErrorKind::invalid_argument, "output_dir must not be empty");
  return plan;
}

json plan_to_json(const ExperimentPlan& plan) {
  json ids = json::array();
  for (auto id : plan.inequalities) ids.push_back(std::string(to_string(id)));
  json doc = {
      {"catalog", plan.catalog_path},
      {"domains", plan.domains},
      {"inequalities", ids},
      {"grids", plan.grids},
      {"fields", plan.fields},
      {"N_max", plan.N_max},
      {"Lambda_grid", {{"lo", plan.Lambda_grid.lo}, {"hi", plan.Lambda_grid.hi}, {"count", plan.Lambda_grid.count}}},
      {"gammas", plan.gammas},
      {"k_limit", plan.k_limit},
      {"analytic", plan.analytic},
      {"tol", plan.tol},
      {"seed", plan.seed},
      {"output_dir", plan.output_dir},
  };
  return doc;
}

ExperimentPlan load_plan(const std::string& path) {
  const std::string text = read_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::invalid_argument, "plan " + path + " is not valid JSON: " + e.what());
  }
  ExperimentPlan plan = plan_from_json(doc);
  // A relative catalog path is taken relative to the plan file.
  if (!plan.catalog_path.empty() && fs::path(plan.catalog_path).is_relative()) {
    const fs::path beside = fs::path(path).parent_path() / plan.catalog_path;
    if (fs::exists(beside)) plan.catalog_path = beside.string();
  }
  return plan;
}

std::string plan_hash(const ExperimentPlan& plan) { return hash_with_catalog(plan, plan_catalog(plan)); }

// Spectra -------------------------------------------------------------------

double refined_spacing(double h, double inradius) {
  while (h >= inradius / 4.0) h *= 0.5;
  return h;
}

SpectrumRun compute_spectrum(const DomainSpec& spec, const GeometricFunctionals& f, double field,
                             const ExperimentPlan& plan) {
  SpectrumRun run;
  const double hi_multiple = plan.Lambda_grid.hi;

  if (field == 0.0 && plan.analytic) {
    std::size_t count = static_cast<std::size_t>(plan.N_max);
    if (wants(plan, InequalityId::weyl_secondterm_sign)) count = std::max<std::size_t>(count, kWeylTarget);
    if (auto values = analytic_eigenvalues(spec, count)) {
      const double target = hi_multiple * values->front();
      while (values->back() < target && count < kAnalyticCap) {
        count *= 2;
        values = analytic_eigenvalues(spec, count);
      }
      run.estimate = analytic_spectrum(std::move(*values), 0.0);
      return run;
    }
  }

  std::vector<double> grids = plan.grids;
  std::sort(grids.begin(), grids.end(), std::greater<>());  // coarse first
  double scale = 1.0;
  const double coarse = refined_spacing(grids.front(), f.inradius);
  if (coarse < grids.front()) {
    scale = coarse / grids.front();
    run.notes.push_back("grids refined by " + format_number(scale) + " to keep h < inradius/4");
  }
  while (std::abs(field) * (grids.front() * scale) * (grids.front() * scale) >= 0.5) {
    scale *= 0.5;
    run.notes.push_back("grids refined to h = " + format_number(grids.front() * scale) + " for the field strength");
  }
  for (double& h : grids) h *= scale;
  run.grids = grids;

  bool aligned = true;
  for (double h : grids) aligned = aligned && grid_aligned(spec, h);

  const GridDomain fine_grid = rasterize(spec, grids.back());
  const LinearOperatorMatrix fine_op = assemble(fine_grid, field);
  SolverOptions options = solver_options(plan);
  options.cover_multiple = hi_multiple;
  options.k_limit = plan.k_limit;
  const int n_fine = static_cast<int>(fine_op.dimension());
  const int k = std::min(plan.N_max, n_fine);
  SpectralResult fine = lowest_eigenpairs(fine_op, k, options);
  fine.require_converged();

  if (grids.size() == 2) {
    const GridDomain coarse_grid = rasterize(spec, grids.front());
    const LinearOperatorMatrix coarse_op = assemble(coarse_grid, field);
    const int kc = std::min(static_cast<int>(fine.eigenvalues.size()), static_cast<int>(coarse_op.dimension()));
    SpectralResult c = lowest_eigenpairs(coarse_op, kc, solver_options(plan));
    c.require_converged();
    run.estimate = richardson_spectrum(c, fine, aligned, f.inradius);
  } else {
    run.estimate = finite_difference_spectrum(fine, aligned, f.inradius);
  }
  run.fine = std::move(fine);
  return run;
}

DomainEvaluation evaluate_domain(const DomainSpec& spec, double field, const ExperimentPlan& plan) {
  DomainEvaluation ev;
  ev.functionals = compute_functionals(spec);
  const GeometricFunctionals& f = ev.functionals;
  const std::string label = spec.label;
  if (field != 0.0 && f.dimension != 2) {
    ev.notes.push_back("magnetic runs need a planar domain; nothing evaluated");
    return ev;
  }

  ev.spectrum = compute_spectrum(spec, f, field, plan);
  for (const auto& n : ev.spectrum.notes) ev.notes.push_back(n);
  if (field != 0.0 && !f.is_convex) {
    ev.notes.push_back("heuristic: magnetic Hardy constant taken as c_h = " + format_number(f.hardy) +
                       " on a non-convex domain");
  }
  const SpectrumEstimate& est = ev.spectrum.estimate;
  if (est.eigenvalues.empty()) throw Error(ErrorKind::spectrum_truncated, "no eigenvalues computed");
  const double lambda1 = est.eigenvalues.front();
  const double top = est.eigenvalues.back();

  std::vector<double> lambdas;      // covered by the spectrum
  std::vector<double> all_lambdas;  // the full grid, for spectrum-free rows
  for (double m : plan.Lambda_grid.multiples()) {
    all_lambdas.push_back(m * lambda1);
    if (m * lambda1 <= top) lambdas.push_back(m * lambda1);
  }
  if (lambdas.size() < all_lambdas.size()) {
    ev.notes.push_back("Lambda grid stops at " + format_number(top / lambda1) + " lambda_1 (k_limit)");
  }
  const int n_max = std::min<int>(plan.N_max, static_cast<int>(est.size()));
  if (n_max < plan.N_max) ev.notes.push_back("N stops at " + std::to_string(n_max));

  const std::vector<InequalityId> ids = plan.inequalities.empty() ? all_inequalities() : plan.inequalities;
  VerifyParams base;
  base.field = field;
  base.domain = label;

  for (InequalityId id : ids) {
    if (!applicable(id, f, field)) continue;
    VerifyParams p = base;
    if (is_sum_id(id)) {
      for (int N = 1; N <= n_max; ++N) {
        p.N = N;
        ev.reports.push_back(verify_inequality(id, est, &f, p));
      }
    } else if (is_gamma_family(id)) {
      for (double gamma : plan.gammas) {
        p.gamma = gamma;
        for (double L : lambdas) {
          p.Lambda = L;
          ev.reports.push_back(verify_inequality(id, est, &f, p));
        }
      }
    } else if (is_gamma_one_riesz(id)) {
      for (double L : lambdas) {
        if (L < lambda1) continue;  // stated for Lambda >= lambda_1 only
        p.Lambda = L;
        ev.reports.push_back(verify_inequality(id, est, &f, p));
      }
    } else {
      switch (id) {
        case InequalityId::lambda1_hardy:
          ev.reports.push_back(verify_inequality(id, est, &f, p));
          break;
        case InequalityId::diamagnetic: {
          // Same grid on both sides: the lattice inequality holds exactly.
          const SpectralResult& mag = *ev.spectrum.fine;
          const GridDomain g = rasterize(spec, mag.grid_spacing);
          SpectralResult zero = lowest_eigenpairs(assemble_dirichlet(g), 1, solver_options(plan));
          zero.require_converged();
          const SpectrumEstimate raw = finite_difference_spectrum(mag, grid_aligned(spec, mag.grid_spacing), f.inradius);
          p.reference_lambda1 = zero.eigenvalues.front();
          p.reference_tolerance = zero.residuals.front();
          BoundReport r = verify_inequality(id, raw, &f, p);
          ev.reports.push_back(r);
          break;
        }
        case InequalityId::landau_identity:
          for (double L : all_lambdas) {
            p.Lambda = L;
            ev.reports.push_back(verify_inequality(id, est, &f, p));
          }
          break;
        case InequalityId::legendre_duality:
          ev.reports.push_back(verify_inequality(id, est, &f, p));
          break;
        case InequalityId::weyl_secondterm_sign:
          if (est.source == SpectrumSource::finite_difference) {
            ev.notes.push_back("weyl_secondterm_sign needs an analytic or extrapolated spectrum");
          } else if (est.size() < static_cast<std::size_t>(kWeylMinimum)) {
            ev.notes.push_back("weyl_secondterm_sign needs at least 500 eigenvalues");
          } else {
            p.N = static_cast<int>(std::min<std::size_t>(est.size(), kWeylTarget));
            ev.reports.push_back(verify_inequality(id, est, &f, p));
          }
          break;
        default:
          break;
      }
    }
  }
  return ev;
}

// CSV -----------------------------------------------------------------------

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string report_csv_header() { return "domain,inequality_id,parameter,B,lhs,rhs,slack,budget,verdict,gamma,h\n"; }

std::string report_csv_row(const BoundReport& r) {
  std::string row = csv_field(r.domain);
  row += ',';
  row += to_string(r.inequality_id);
  for (double v : {r.parameter, r.field, r.lhs, r.rhs, r.slack, r.tolerance_budget}) {
    row += ',';
    row += format_number(v);
  }
  row += ',';
  row += to_string(r.verdict);
  row += ',';
  row += format_number(r.gamma);
  row += ',';
  row += format_number(r.spacing);
  row += '\n';
  return row;
}

std::string functionals_csv_header() {
  return "label,dimension,volume,perimeter,inradius,sigma,sigma_error,inertia,hardy,convex,"
         "melas_remainder,improved_remainder,convex_remainder\n";
}

std::string functionals_csv_row(const GeometricFunctionals& f) {
  // Coefficients of N in the Melas, improved and convex Li-Yau remainders.
  const double melas = melas_constant(f.dimension) * f.volume / f.inertia;
  const double improved = f.sigma * f.sigma / (16.0 * f.hardy * f.volume * f.volume);
  std::string row = csv_field(f.label);
  row += ',' + std::to_string(f.dimension);
  for (double v : {f.volume, f.perimeter, f.inradius, f.sigma, f.sigma_error_estimate, f.inertia, f.hardy}) {
    row += ',' + format_number(v);
  }
  row += f.is_convex ? ",true" : ",false";
  row += ',' + format_number(melas);
  row += ',' + format_number(improved);
  row += ',';
  if (f.is_convex) row += format_number(1.0 / (64.0 * f.inradius * f.inradius));
  row += '\n';
  return row;
}

std::string spectrum_csv(const SpectrumEstimate& s) {
  std::string out = "index,eigenvalue,budget\n";
  for (std::size_t j = 0; j < s.size(); ++j) {
    out += std::to_string(j + 1) + ',' + format_number(s.eigenvalues[j]) + ',' + format_number(s.budget(j)) + '\n';
  }
  return out;
}

std::vector<ReportRow> read_report_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::invalid_argument, "report " + path + " has no header");
  const auto header = split_csv_line(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* need : {"domain", "inequality_id", "parameter", "B", "lhs", "rhs", "slack", "budget", "verdict"}) {
    if (!col.count(need)) throw Error(ErrorKind::invalid_argument, std::string("report lacks column ") + need);
  }
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) throw Error(ErrorKind::invalid_argument, "ragged report row: " + line);
    ReportRow r;
    r.domain = cells[col["domain"]];
    r.inequality_id = cells[col["inequality_id"]];
    r.parameter = parse_number(cells[col["parameter"]]);
    r.field = parse_number(cells[col["B"]]);
    r.lhs = parse_number(cells[col["lhs"]]);
    r.rhs = parse_number(cells[col["rhs"]]);
    r.slack = parse_number(cells[col["slack"]]);
    r.budget = parse_number(cells[col["budget"]]);
    r.verdict = cells[col["verdict"]];
    if (col.count("gamma")) r.gamma = parse_number(cells[col["gamma"]]);
    if (col.count("h")) r.spacing = parse_number(cells[col["h"]]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  std::ostringstream suffix;
  suffix << ".tmp." << std::this_thread::get_id();
  const fs::path tmp = target.string() + suffix.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw Error(ErrorKind::io, "write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

// Sweep ---------------------------------------------------------------------

std::string_view to_string(TaskStatus s) {
  switch (s) {
    case TaskStatus::completed: return "completed";
    case TaskStatus::failed: return "failed";
    case TaskStatus::skipped: return "skipped";
  }
  return "failed";
}

json RunManifest::to_json() const {
  json tasks_json = json::array();
  for (const auto& t : tasks) {
    tasks_json.push_back({{"id", t.id},
                          {"domain", t.domain},
                          {"B", t.field},
                          {"status", std::string(spectrolab::to_string(t.status))},
                          {"seconds", t.seconds},
                          {"message", t.message}});
  }
  return {{"plan_hash", plan_hash}, {"version", version}, {"workers", workers}, {"seconds", seconds},
          {"tasks", tasks_json}};
}

int RunManifest::failed_tasks() const {
  return static_cast<int>(std::count_if(tasks.begin(), tasks.end(),
                                        [](const TaskRecord& t) { return t.status == TaskStatus::failed; }));
}

int workers_from_environment() {
  const char* v = std::getenv(kWorkersVariable);
  if (!v || !*v) return 1;
  int n = 0;
  const auto res = std::from_chars(v, v + std::char_traits<char>::length(v), n);
  if (res.ec != std::errc{} || n < 1) {
    throw Error(ErrorKind::invalid_argument, std::string(kWorkersVariable) + " must be a positive integer");
  }
  return n;
}

std::string task_id(const std::string& label, double field) {
  std::string id;
  for (char c : label) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                    c == '.' || c == '_';
    id += ok ? c : '_';
  }
  return id + "__B" + format_number(field);
}

RunManifest run(const ExperimentPlan& plan, int workers) {
  const auto t_start = std::chrono::steady_clock::now();
  const Catalog catalog = plan_catalog(plan);
  const std::vector<DomainSpec> domains = catalog.select(plan.domains);

  RunManifest manifest;
  manifest.plan_hash = hash_with_catalog(plan, catalog);
  manifest.version = SPECTROLAB_VERSION;
  manifest.workers = workers > 0 ? workers : workers_from_environment();

  const fs::path out(plan.output_dir);
  const fs::path task_dir = out / "tasks";
  const fs::path spectra_dir = out / "spectra";
  fs::create_directories(task_dir);
  fs::create_directories(spectra_dir);

  struct Task {
    const DomainSpec* spec;
    double field;
    std::string id;
  };
  std::vector<Task> tasks;
  for (const auto& d : domains) {
    for (double b : plan.fields) tasks.push_back({&d, b, task_id(d.label, b)});
  }
  manifest.tasks.resize(tasks.size());

  auto marker_path = [&](const Task& t) { return task_dir / (t.id + ".json"); };
  auto report_path = [&](const Task& t) { return task_dir / (t.id + ".report.csv"); };
  auto functionals_path = [&](const Task& t) { return task_dir / (t.id + ".functionals.csv"); };

  auto finished_before = [&](const Task& t) {
    std::error_code ec;
    if (!fs::exists(marker_path(t), ec) || !fs::exists(report_path(t), ec) || !fs::exists(functionals_path(t), ec)) {
      return false;
    }
    try {
      const json m = json::parse(read_file(marker_path(t)));
      return m.value("plan_hash", "") == manifest.plan_hash && m.value("status", "") == "completed";
    } catch (const std::exception&) {
      return false;
    }
  };

  std::mutex manifest_mutex;
  auto write_manifest = [&] {
    // Single writer: callers hold manifest_mutex.
    write_file_atomic((out / "manifest.json").string(), manifest.to_json().dump(2) + "\n");
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& t = tasks[i];
      TaskRecord rec;
      rec.id = t.id;
      rec.domain = t.spec->label;
      rec.field = t.field;
      const auto t0 = std::chrono::steady_clock::now();
      if (finished_before(t)) {
        rec.status = TaskStatus::skipped;
        rec.message = "completed in an earlier run";
      } else {
        std::error_code ec;
        fs::remove(marker_path(t), ec);
        try {
          const DomainEvaluation ev = evaluate_domain(*t.spec, t.field, plan);
          std::string rows;
          for (const auto& r : ev.reports) rows += report_csv_row(r);
          if (!ev.spectrum.estimate.eigenvalues.empty()) {
            write_file_atomic((spectra_dir / (t.id + ".csv")).string(), spectrum_csv(ev.spectrum.estimate));
          }
          write_file_atomic(report_path(t).string(), rows);
          write_file_atomic(functionals_path(t).string(), functionals_csv_row(ev.functionals));
          rec.status = TaskStatus::completed;
          rec.message = join(ev.notes, "; ");
          const json marker = {{"plan_hash", manifest.plan_hash}, {"status", "completed"}, {"notes", ev.notes}};
          write_file_atomic(marker_path(t).string(), marker.dump(2) + "\n");
        } catch (const std::exception& e) {
          rec.status = TaskStatus::failed;
          rec.message = e.what();
        }
      }
      rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::lock_guard<std::mutex> lock(manifest_mutex);
      manifest.tasks[i] = std::move(rec);
      write_manifest();
    }
  };

  const int pool = std::max(1, std::min<int>(manifest.workers, static_cast<int>(tasks.size())));
  if (pool == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < pool; ++w) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
  }

  // Merge in plan order so the combined files do not depend on scheduling.
  std::string report = report_csv_header();
  std::string functionals = functionals_csv_header();
  std::set<std::string> seen_domains;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (manifest.tasks[i].status == TaskStatus::failed) continue;
    report += read_file(report_path(tasks[i]));
    if (seen_domains.insert(tasks[i].spec->label).second) functionals += read_file(functionals_path(tasks[i]));
  }
  write_file_atomic((out / "report.csv").string(), report);
  write_file_atomic((out / "functionals.csv").string(), functionals);

  manifest.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  std::lock_guard<std::mutex> lock(manifest_mutex);
  write_manifest();
  return manifest;
}

// Plot data -----------------------------------------------------------------

std::string_view to_string(PlotKind k) {
  switch (k) {
    case PlotKind::slack_vs_N: return "slack_vs_N";
    case PlotKind::slack_vs_Lambda: return "slack_vs_Lambda";
    case PlotKind::convergence: return "convergence";
  }
  return "slack_vs_N";
}

PlotKind plot_kind_from_string(std::string_view name) {
  for (PlotKind k : {PlotKind::slack_vs_N, PlotKind::slack_vs_Lambda, PlotKind::convergence}) {
    if (name == to_string(k)) return k;
  }
  throw Error(ErrorKind::unknown_kind, "unknown plot kind '" + std::string(name) + "'");
}

std::string emit_plot_data(const std::string& report_path, PlotKind kind, const std::string& out_path,
                           const PlotFilter& filter) {
  const std::vector<ReportRow> rows = read_report_csv(report_path);
  auto keep = [&](const ReportRow& r) {
    if (!filter.domain.empty() && r.domain != filter.domain) return false;
    if (filter.inequality && r.inequality_id != *filter.inequality) return false;
    if (filter.field && r.field != *filter.field) return false;
    if (filter.gamma && r.gamma != *filter.gamma) return false;
    return true;
  };
  auto id_of = [](const std::string& s) -> std::optional<InequalityId> {
    try {
      return inequality_from_string(s);
    } catch (const Error&) {
      return std::nullopt;
    }
  };

  std::string csv;
  if (kind == PlotKind::slack_vs_N || kind == PlotKind::slack_vs_Lambda) {
    csv = kind == PlotKind::slack_vs_N ? "N,slack,budget\n" : "Lambda,slack,budget\n";
    for (const auto& r : rows) {
      if (!keep(r)) continue;
      const auto id = id_of(r.inequality_id);
      if (!id) continue;
      const bool by_N = is_sum_id(*id);
      const bool by_Lambda = is_gamma_family(*id) || is_gamma_one_riesz(*id) || *id == InequalityId::landau_identity;
      if ((kind == PlotKind::slack_vs_N && !by_N) || (kind == PlotKind::slack_vs_Lambda && !by_Lambda)) continue;
      csv += format_number(r.parameter) + ',' + format_number(r.slack) + ',' + format_number(r.budget) + '\n';
    }
  } else {
    std::map<double, double, std::greater<>> by_h;  // coarse first
    std::set<std::pair<std::string, double>> series;
    for (const auto& r : rows) {
      if (!keep(r) || r.inequality_id != "lambda1_hardy" || !(r.spacing > 0.0)) continue;
      series.insert({r.domain, r.field});
      by_h[r.spacing] = r.lhs;
    }
    if (series.size() > 1) {
      throw Error(ErrorKind::invalid_argument, "convergence needs one domain and field; filter the report");
    }
    csv = "h,lambda1,ratio\n";
    std::vector<std::pair<double, double>> pts(by_h.begin(), by_h.end());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      std::string ratio;
      if (filter.reference) {
        if (i >= 1) {
          const double prev = std::abs(pts[i - 1].second - *filter.reference);
          const double cur = std::abs(pts[i].second - *filter.reference);
          ratio = format_number(prev / cur);
        }
      } else if (i >= 2) {
        ratio = format_number((pts[i - 1].second - pts[i - 2].second) / (pts[i].second - pts[i - 1].second));
      }
      csv += format_number(pts[i].first) + ',' + format_number(pts[i].second) + ',' + ratio + '\n';
    }
  }

  std::string target = out_path;
  if (target.empty()) {
    const fs::path rp(report_path);
    target = (rp.parent_path() / (rp.stem().string() + "_" + std::string(to_string(kind)) + ".csv")).string();
  }
  write_file_atomic(target, csv);
  return target;
}

}  // namespace spectrolab
