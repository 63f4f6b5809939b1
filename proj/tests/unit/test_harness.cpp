#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "spectrolab/error.hpp"
#include "spectrolab/harness.hpp"

using namespace spectrolab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const double pi = std::numbers::pi;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("spectrolab_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ExperimentPlan small_plan(const fs::path& out) {
  ExperimentPlan p;
  p.domains = {"square", "L-shape"};
  p.grids = {1.0 / 16, 1.0 / 32};
  p.fields = {0.0, 5.0};
  p.N_max = 10;
  p.Lambda_grid = {1.0, 5.0, 5};
  p.k_limit = 80;
  p.seed = 11;
  p.output_dir = out.string();
  return p;
}

BoundReport hardy_row(const std::string& domain, const DomainSpec& spec, double h) {
  const auto f = compute_functionals(spec);
  const auto op = assemble_dirichlet(rasterize(spec, h));
  SolverOptions o;
  o.tol = 1e-10;
  const auto r = lowest_eigenpairs(op, 1, o).require_converged();
  const auto s = finite_difference_spectrum(r, grid_aligned(spec, h), f.inradius);
  VerifyParams params;
  params.domain = domain;
  return verify_inequality(InequalityId::lambda1_hardy, s, &f, params);
}

std::vector<std::vector<double>> read_numeric_csv(const std::string& path, std::string& header) {
  std::ifstream in(path);
  std::getline(in, header);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(cell.empty() ? std::nan("") : std::stod(cell));
    if (!line.empty() && line.back() == ',') row.push_back(std::nan(""));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("plan parsing and validation") {
    const auto plan = load_plan(std::string(SPECTROLAB_DATA_DIR) + "/quick_plan.json");
    CHECK(plan.grids.size() == 2);
    CHECK(plan.seed == 7);
    CHECK(plan.inequalities.empty());
    CHECK(fs::path(plan.catalog_path).is_absolute());
    const auto again = plan_from_json(plan_to_json(plan));
    CHECK(plan_to_json(again) == plan_to_json(plan));

    auto bad = [](const char* text) {
      try {
        plan_from_json(json::parse(text));
      } catch (const Error& e) {
        return e.kind();
      }
      return ErrorKind::io;
    };
    CHECK(bad(R"({"grids": [0.1, 0.05, 0.025]})") == ErrorKind::invalid_argument);
    CHECK(bad(R"({"grids": []})") == ErrorKind::invalid_argument);
    CHECK(bad(R"({"grids": [0.1, 0.1]})") == ErrorKind::invalid_argument);
    CHECK(bad(R"({"grids": [-0.1]})") == ErrorKind::invalid_argument);
    CHECK(bad(R"({"colour": "blue"})") == ErrorKind::invalid_argument);
    CHECK(bad(R"({"gammas": [-1]})") == ErrorKind::invalid_gamma);
    CHECK(bad(R"({"N_max": 0})") == ErrorKind::invalid_argument);
    CHECK(bad(R"({"inequalities": ["berezin", "sharp"]})") == ErrorKind::invalid_argument);
    CHECK(bad(R"({"Lambda_grid": {"lo": 5, "hi": 1}})") == ErrorKind::invalid_argument);
  }

  TEST_CASE("plan hash") {
    ExperimentPlan a;
    ExperimentPlan b = a;
    b.output_dir = "elsewhere";
    CHECK(plan_hash(a) == plan_hash(b));
    CHECK(plan_hash(a).size() == 16);
    b.seed = a.seed + 1;
    CHECK(plan_hash(a) != plan_hash(b));
    b = a;
    b.fields = {0.0, 5.0};
    CHECK(plan_hash(a) != plan_hash(b));
  }

  TEST_CASE("Lambda grid and spacing refinement") {
    const auto m = LambdaGrid{1.0, 50.0, 50}.multiples();
    REQUIRE(m.size() == 50);
    CHECK(m.front() == 1.0);
    CHECK(m.back() == 50.0);
    CHECK(LambdaGrid{2.0, 2.0, 1}.multiples() == std::vector<double>{2.0});
    CHECK(refined_spacing(1.0 / 64, 0.5) == 1.0 / 64);
    CHECK(refined_spacing(1.0 / 64, 0.05) == 1.0 / 128);
    CHECK(refined_spacing(0.1, 0.1) < 0.025);
  }

  TEST_CASE("task ids and number formatting") {
    CHECK(task_id("rect-10x0.1", 5.0) == "rect-10x0.1__B5");
    CHECK(task_id("a b/c", 0.5) == "a_b_c__B0.5");
    CHECK(format_number(0.1) == "0.1");
    CHECK(std::stod(format_number(1.0 / 3)) == 1.0 / 3);
    CHECK(format_number(-2.0) == "-2");
  }

  TEST_CASE("evaluate_domain on analytic and finite-difference spectra") {
    ExperimentPlan plan;
    plan.N_max = 20;
    plan.Lambda_grid = {1.0, 10.0, 10};
    const auto sq = evaluate_domain(DomainSpec::rectangle(1, 1, "square"), 0.0, plan);
    CHECK(sq.spectrum.estimate.source == SpectrumSource::analytic);
    for (const auto& r : sq.reports) {
      CHECK(r.verdict != Verdict::fail);
      if (r.inequality_id == InequalityId::liyau_classical) CHECK(r.slack >= 0.0);
    }
    plan.grids = {1.0 / 64};
    const auto l = evaluate_domain(DomainSpec::polygon({{0, 0}, {1, 0}, {1, 0.5}, {0.5, 0.5}, {0.5, 1}, {0, 1}}, "L"),
                                   0.0, plan);
    CHECK(l.spectrum.estimate.source == SpectrumSource::finite_difference);
    bool saw_sum = false;
    for (const auto& r : l.reports) {
      CHECK(r.verdict != Verdict::fail);
      // Single-grid rows carry a budget, so no claim rests on a bare comparison.
      if (r.inequality_id == InequalityId::liyau_classical || r.inequality_id == InequalityId::liyau_improved ||
          r.inequality_id == InequalityId::melas || r.inequality_id == InequalityId::lambda1_hardy) {
        saw_sum = true;
        CHECK(r.tolerance_budget > 0.0);
        CHECK((r.verdict == Verdict::pass || r.verdict == Verdict::indeterminate));
      }
    }
    CHECK(saw_sum);
    const auto cube = evaluate_domain(DomainSpec::product(1.0, DomainSpec::rectangle(1, 1), "cube"), 5.0, plan);
    CHECK(cube.reports.empty());
    CHECK_FALSE(cube.notes.empty());
  }

  TEST_CASE("sweep writes outputs, skips on rerun and is reproducible") {
    const auto dir = scratch("sweep");
    const auto plan = small_plan(dir / "a");
    const auto first = run(plan, 2);
    REQUIRE(first.tasks.size() == 4);
    for (const auto& t : first.tasks) CHECK(t.status == TaskStatus::completed);
    CHECK(first.failed_tasks() == 0);
    for (const char* name : {"report.csv", "functionals.csv", "manifest.json"}) CHECK(fs::exists(dir / "a" / name));
    CHECK(fs::exists(dir / "a" / "spectra" / (task_id("L-shape", 5.0) + ".csv")));
    const auto report = slurp(dir / "a" / "report.csv");
    CHECK(report.find("\r") == std::string::npos);
    CHECK(report.find(",fail,") == std::string::npos);

    const auto second = run(plan, 1);
    for (const auto& t : second.tasks) CHECK(t.status == TaskStatus::skipped);
    CHECK(slurp(dir / "a" / "report.csv") == report);
    CHECK(slurp(dir / "a" / "functionals.csv") == slurp(dir / "a" / "functionals.csv"));

    auto other = plan;
    other.output_dir = (dir / "b").string();
    run(other, 1);
    CHECK(slurp(dir / "b" / "report.csv") == report);
    CHECK(slurp(dir / "b" / "functionals.csv") == slurp(dir / "a" / "functionals.csv"));

    const json manifest = json::parse(slurp(dir / "a" / "manifest.json"));
    CHECK(manifest.at("plan_hash") == first.plan_hash);
    CHECK(manifest.at("tasks").size() == 4);

    // A changed plan invalidates the markers.
    auto changed = plan;
    changed.seed = 12;
    const auto third = run(changed, 1);
    for (const auto& t : third.tasks) CHECK(t.status == TaskStatus::completed);
    fs::remove_all(dir);
  }

  TEST_CASE("a failing task does not stop the others") {
    const auto dir = scratch("failing");
    Catalog cat;
    cat.domains.push_back(DomainSpec::rectangle(1, 1, "square"));
    cat.domains.push_back(DomainSpec::product(
        1.0, DomainSpec::polygon({{0, 0}, {1, 0}, {1, 0.5}, {0.5, 0.5}, {0.5, 1}, {0, 1}}), "L-prism"));
    std::ofstream(dir / "catalog.json") << catalog_to_json(cat).dump(2);
    ExperimentPlan plan;
    plan.catalog_path = (dir / "catalog.json").string();
    plan.N_max = 5;
    plan.Lambda_grid = {1.0, 2.0, 2};
    plan.grids = {0.125};
    plan.output_dir = (dir / "out").string();
    const auto m = run(plan, 1);
    REQUIRE(m.tasks.size() == 2);
    CHECK(m.tasks[0].status == TaskStatus::completed);
    CHECK(m.tasks[1].status == TaskStatus::failed);
    CHECK(m.tasks[1].message.find("HardyUnknown") != std::string::npos);
    CHECK(m.failed_tasks() == 1);
    const auto rows = read_report_csv((dir / "out" / "report.csv").string());
    CHECK_FALSE(rows.empty());
    for (const auto& r : rows) CHECK(r.domain == "square");
    fs::remove_all(dir);
  }

  TEST_CASE("worker count from the environment") {
    ::unsetenv("SPECTROLAB_WORKERS");
    CHECK(workers_from_environment() == 1);
    ::setenv("SPECTROLAB_WORKERS", "3", 1);
    CHECK(workers_from_environment() == 3);
    ::setenv("SPECTROLAB_WORKERS", "zero", 1);
    CHECK_THROWS_AS(workers_from_environment(), Error);
    ::unsetenv("SPECTROLAB_WORKERS");
  }

  TEST_CASE("plot data") {
    const auto dir = scratch("plot");
    CHECK_THROWS_AS(plot_kind_from_string("histogram"), Error);
    try {
      plot_kind_from_string("histogram");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::unknown_kind);
    }

    const auto empty = dir / "empty.csv";
    write_file_atomic(empty.string(), report_csv_header());
    const auto out = emit_plot_data(empty.string(), PlotKind::slack_vs_N);
    CHECK(out == (dir / "empty_slack_vs_N.csv").string());
    CHECK(slurp(out) == "N,slack,budget\n");
    CHECK(slurp(emit_plot_data(empty.string(), PlotKind::convergence)) == "h,lambda1,ratio\n");

    ExperimentPlan plan;
    plan.N_max = 100;
    const auto ev = evaluate_domain(DomainSpec::rectangle(1, 1, "square"), 0.0, plan);
    std::string csv = report_csv_header();
    for (const auto& r : ev.reports) csv += report_csv_row(r);
    const auto report = dir / "report.csv";
    write_file_atomic(report.string(), csv);
    PlotFilter filter;
    filter.domain = "square";
    filter.inequality = "liyau_improved";
    std::string header;
    const auto rows = read_numeric_csv(emit_plot_data(report.string(), PlotKind::slack_vs_N, {}, filter), header);
    CHECK(header == "N,slack,budget");
    REQUIRE(rows.size() == 100);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      CHECK(rows[i][0] > rows[i - 1][0]);
      CHECK(rows[i][1] > rows[i - 1][1]);
    }

    filter.inequality = "berezin";
    filter.gamma = 1.0;
    const auto lam = read_numeric_csv(emit_plot_data(report.string(), PlotKind::slack_vs_Lambda, {}, filter), header);
    CHECK(header == "Lambda,slack,budget");
    CHECK(lam.size() == 50);
    fs::remove_all(dir);
  }

  TEST_CASE("convergence plot data") {
    const auto dir = scratch("convergence");
    const auto square = DomainSpec::rectangle(1, 1);
    std::string csv = report_csv_header();
    for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64}) csv += report_csv_row(hardy_row("square", square, h));
    write_file_atomic((dir / "square.csv").string(), csv);
    PlotFilter filter;
    filter.reference = 2 * pi * pi;
    std::string header;
    auto rows = read_numeric_csv(
        emit_plot_data((dir / "square.csv").string(), PlotKind::convergence, (dir / "sq_conv.csv").string(), filter),
        header);
    CHECK(header == "h,lambda1,ratio");
    REQUIRE(rows.size() == 3);
    CHECK(rows[0][0] > rows[1][0]);
    CHECK(std::isnan(rows[0][2]));
    CHECK(rows[1][2] == doctest::Approx(4.0).epsilon(0.01));
    CHECK(rows[2][2] == doctest::Approx(4.0).epsilon(0.01));

    // Staircase boundary: the disc converges at first order, ratio near 2.
    const auto disc = DomainSpec::disc(1);
    csv = report_csv_header();
    for (double h : {1.0 / 64, 1.0 / 128, 1.0 / 256}) csv += report_csv_row(hardy_row("disc", disc, h));
    write_file_atomic((dir / "disc.csv").string(), csv);
    const double j01 = 2.404825557695773;
    filter.reference = j01 * j01;
    rows = read_numeric_csv(
        emit_plot_data((dir / "disc.csv").string(), PlotKind::convergence, (dir / "disc_conv.csv").string(), filter),
        header);
    REQUIRE(rows.size() == 3);
    CHECK(rows[1][2] > 1.5);
    CHECK(rows[1][2] < 2.5);
    CHECK(rows[2][2] > 1.5);
    CHECK(rows[2][2] < 2.5);
    fs::remove_all(dir);
  }
}
