#pragma once

// Experiment plans, per-domain evaluation (geometry, spectrum, bounds) and
// the sweep runner. A sweep writes into output_dir:
//   functionals.csv, spectra/<task>.csv, report.csv, manifest.json
// plus tasks/ with the per-task pieces used to skip finished work on rerun.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "spectrolab/bounds.hpp"
#include "spectrolab/catalog.hpp"
#include "spectrolab/spectra.hpp"

namespace spectrolab {

/// Lambda values as multiples of the ground state: count points from lo to hi.
struct LambdaGrid {
  double lo = 1.0;
  double hi = 50.0;
  int count = 50;

  std::vector<double> multiples() const;
};

struct ExperimentPlan {
  std::string catalog_path;                // empty selects the built-in catalog
  std::vector<std::string> domains;        // label filter, empty keeps all
  std::vector<InequalityId> inequalities;  // empty selects every id
  std::vector<double> grids{1.0 / 64.0};   // one spacing, or two for Richardson
  std::vector<double> fields{0.0};
  int N_max = 100;
  LambdaGrid Lambda_grid;
  std::vector<double> gammas{0.0, 1.0, 1.5};  // Riesz exponents for the Berezin rows
  int k_limit = 400;  // cap on eigenvalues computed per grid
  bool analytic = true;  // closed-form spectra where they exist; false forces finite differences
  double tol = 1e-8;
  std::uint64_t seed = 0x5eed;
  std::string output_dir = "spectrolab-out";
};

/// Throws invalid_argument on malformed or out of range entries.
ExperimentPlan plan_from_json(const nlohmann::json& doc);
nlohmann::json plan_to_json(const ExperimentPlan& plan);
ExperimentPlan load_plan(const std::string& path);
/// FNV-1a over the canonical JSON of the plan, 16 hex digits.
std::string plan_hash(const ExperimentPlan& plan);

std::vector<InequalityId> all_inequalities();

/// Coarsest spacing that keeps h < inradius/4, obtained by halving.
double refined_spacing(double h, double inradius);

/// Spectrum for a domain and field: closed form when one exists at zero
/// field, else finite differences on the plan grids (Richardson with two).
/// Covers at least N_max eigenvalues and Lambda_grid.hi * lambda_1 unless
/// k_limit stops it first.
struct SpectrumRun {
  SpectrumEstimate estimate;
  std::vector<double> grids;           // spacings actually used
  std::optional<SpectralResult> fine;  // raw finest-grid solve
  std::vector<std::string> notes;
};
SpectrumRun compute_spectrum(const DomainSpec& spec, const GeometricFunctionals& f, double field,
                             const ExperimentPlan& plan);

struct DomainEvaluation {
  GeometricFunctionals functionals;
  SpectrumRun spectrum;
  std::vector<BoundReport> reports;
  std::vector<std::string> notes;
};

/// Every applicable inequality of the plan on one domain at one field.
DomainEvaluation evaluate_domain(const DomainSpec& spec, double field, const ExperimentPlan& plan);

// CSV -----------------------------------------------------------------------

/// Shortest decimal that reads back to the same double; "." separator.
std::string format_number(double v);

std::string report_csv_header();
std::string report_csv_row(const BoundReport& r);
std::string functionals_csv_header();
std::string functionals_csv_row(const GeometricFunctionals& f);
std::string spectrum_csv(const SpectrumEstimate& s);

/// One parsed report.csv row.
struct ReportRow {
  std::string domain;
  std::string inequality_id;
  double parameter = 0.0;
  double field = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  double budget = 0.0;
  std::string verdict;
  double gamma = 0.0;
  double spacing = 0.0;
};
std::vector<ReportRow> read_report_csv(const std::string& path);

/// Writes to a temporary sibling and renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);

// Sweep ---------------------------------------------------------------------

enum class TaskStatus { completed, failed, skipped };
std::string_view to_string(TaskStatus s);

struct TaskRecord {
  std::string id;
  std::string domain;
  double field = 0.0;
  TaskStatus status = TaskStatus::failed;
  double seconds = 0.0;
  std::string message;  // error text, or notes joined by "; "
};

struct RunManifest {
  std::string plan_hash;
  std::string version;
  std::vector<TaskRecord> tasks;  // plan order
  double seconds = 0.0;
  int workers = 1;

  nlohmann::json to_json() const;
  int failed_tasks() const;
};

/// Workers from SPECTROLAB_WORKERS, at least 1; defaults to 1.
int workers_from_environment();

/// Runs every (domain, field) task of the plan. Completed tasks of an
/// earlier run with the same plan hash are skipped. Task errors mark the
/// task failed and the others continue.
RunManifest run(const ExperimentPlan& plan, int workers = 0);

/// Task id used for file names: sanitised label and field.
std::string task_id(const std::string& label, double field);

// Plot data -----------------------------------------------------------------

enum class PlotKind { slack_vs_N, slack_vs_Lambda, convergence };
std::string_view to_string(PlotKind k);
/// Throws unknown_kind.
PlotKind plot_kind_from_string(std::string_view name);

struct PlotFilter {
  std::string domain;
  std::optional<std::string> inequality;
  std::optional<double> field;
  std::optional<double> gamma;
  std::optional<double> reference;  // convergence: exact lambda_1 when known
};

/// Plain CSV for external plotting:
///   slack_vs_N       N,slack,budget
///   slack_vs_Lambda  Lambda,slack,budget
///   convergence      h,lambda1,ratio  from lambda1_hardy rows, coarse to fine;
///                    ratio of successive errors against `reference`, or of
///                    successive differences without one; empty where undefined.
/// Writes next to the report as <stem>_<kind>.csv when out_path is empty and
/// returns the path written.
std::string emit_plot_data(const std::string& report_path, PlotKind kind, const std::string& out_path = {},
                           const PlotFilter& filter = {});

}  // namespace spectrolab
