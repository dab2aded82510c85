#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <cnode/analysis/report.hpp>
#include <cnode/numerics/csv.hpp>
#include <cnode/training/gradcheck.hpp>

using namespace cnode;
using namespace cnode::analysis;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
namespace fs = std::filesystem;

namespace {

const plant::PlantSystem& the_plant() {
  static const plant::PlantSystem p = plant::build_default_plant();
  return p;
}

const plant::Dataset& small_data() {
  static const plant::Dataset d = [] {
    SeededRng rng(12);
    const plant::Dataset full = plant::make_dataset(the_plant(), rng);
    plant::Dataset out;
    out.train = training::head(full.train, 64);
    out.val = training::head(full.val, 64);
    out.test = training::head(full.test, 64);
    out.observed_index = full.observed_index;
    return out;
  }();
  return d;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

std::vector<double> split_numbers(const std::string& line) {
  std::vector<double> out;
  std::stringstream ss(line);
  for (std::string f; std::getline(ss, f, ',');) out.push_back(f.empty() ? NAN : std::stod(f));
  return out;
}

}  // namespace

TEST_CASE("the true model has zero open-loop and N-step error") {
  const auto [spec, params] = models::truth_model(the_plant(), models::AlgebraicVariant::gray);
  for (const plant::Partition* p : {&small_data().train, &small_data().test}) {
    CHECK(open_loop_mse(spec, params, *p) < 1e-20);
    CHECK(nstep_mse_eval(spec, params, *p, 16) < 1e-20);
  }
}

TEST_CASE("N-step error with N equal to the partition length is the open-loop error") {
  const auto spec = models::spec_from_label("black", the_plant());
  SeededRng rng(3);
  const auto params = models::init_params(spec, rng);
  const auto& part = small_data().val;
  CHECK_THAT(nstep_mse_eval(spec, params, part, part.steps()), WithinRel(open_loop_mse(spec, params, part), 1e-12));
}

TEST_CASE("diverging models score infinity instead of throwing") {
  auto spec = models::spec_from_label("srnn", the_plant());
  SeededRng rng(3);
  auto params = models::init_params(spec, rng);
  params.set("A_raw", 1e100 * Matrix::identity(4));
  const auto r = open_loop(spec, params, small_data().test, {}, 3);
  CHECK(r.diverged);
  CHECK(std::isinf(r.mse));
  CHECK(std::isinf(nstep_mse_eval(spec, params, small_data().test, 64)));
}

TEST_CASE("violation summary sums state and input slack per step") {
  const Matrix sx = Matrix::from_rows({{0, 1, 0, 0}, {0, 0, 0, 0}, {2, 0, 0, 1}});
  const Matrix su = Matrix::column({0.5, 0.0, 0.0});
  const SlackSummary s = violation_summary(sx, su);
  CHECK_THAT(s.mean, WithinAbs(4.5 / 3.0, 1e-15));
  CHECK(s.max == 3.0);
}

TEST_CASE("rollout violations match the constrained rollout slack") {
  const auto spec = models::spec_from_label("cgray", the_plant());
  SeededRng rng(5);
  const auto params = models::init_params(spec, rng);
  auto bounds = constraints::default_bounds(the_plant());
  bounds.x_upper.fill(5.0);
  const auto& part = small_data().test;
  const auto r = models::rollout(params, spec, part.x0(), part.signals, part.steps(), bounds);
  const SlackSummary direct = violation_summary(r.slack_x, r.slack_u);
  const SlackSummary recomputed = rollout_violations(r, spec, bounds);
  CHECK(direct.mean > 0.0);
  CHECK_THAT(recomputed.mean, WithinRel(direct.mean, 1e-12));
  CHECK_THAT(recomputed.max, WithinRel(direct.max, 1e-12));
}

TEST_CASE("eigenvalue formatting") {
  CHECK(format_eigenvalue({0.99, 0.0}) == "0.9900");
  CHECK(format_eigenvalue({0.9076, 0.2807}) == "0.9076+0.2807i");
  CHECK(format_eigenvalue({0.9076, -0.2807}) == "0.9076-0.2807i");
  CHECK(format_eigenvalue({-0.5, 1e-15}) == "-0.5000");
  CHECK(format_eigenvalue({1.0, 0.0}, 2) == "1.00");
}

TEST_CASE("spectrum distance is a permutation-invariant metric") {
  const std::vector<ComplexScalar> a{{0.9, 0.1}, {0.9, -0.1}, {0.5, 0.0}, {0.2, 0.0}};
  std::vector<ComplexScalar> b{{0.2, 0.0}, {0.9, -0.1}, {0.5, 0.0}, {0.9, 0.1}};
  CHECK(spectrum_distance(a, b) == 0.0);
  b[2] = {0.5, 0.0};
  b[0] = {0.2, 0.3};
  CHECK_THAT(spectrum_distance(a, b), WithinAbs(0.3, 1e-12));
  CHECK(spectrum_distance(a, b) == spectrum_distance(b, a));
  CHECK_THROWS_AS(spectrum_distance(a, {{1.0, 0.0}}), DimensionError);
}

TEST_CASE("eigen table starts with the truth row") {
  const Matrix a = the_plant().A;
  const auto rows = eigen_report({{"copy", a}, {"scaled", 0.5 * a}}, the_plant());
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].model == "True");
  CHECK(rows[1].distance < 1e-12);
  CHECK(rows[2].distance > 0.1);
  std::ostringstream out;
  write_eigen_csv(out, rows);
  const std::string csv = out.str();
  CHECK(csv.rfind("model,lambda1,lambda2,lambda3,lambda4,distance\nTrue,1.0000,0.9900,0.9800,0.2500,0.0000\n", 0) == 0);
  CHECK_THROWS_AS(eigen_report({{"bad", Matrix(3, 3)}}, the_plant()), DimensionError);
}

TEST_CASE("line plots are well-formed svg") {
  const fs::path path = fs::temp_directory_path() / "cnode_plot.svg";
  write_line_plot(path, {{"a <b>", {1, 2, 3}, {1, 10, 100}}, {"empty", {}, {}}}, {"t & u", "x", "y", true, 640, 320});
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string svg = ss.str();
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("width=\"640\"") != std::string::npos);
  CHECK(svg.find("height=\"320\"") != std::string::npos);
  CHECK(svg.find("a &lt;b&gt;") != std::string::npos);
  CHECK(svg.find("t &amp; u") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("report artifacts are complete and self-consistent") {
  training::SweepPlan plan;
  plan.labels = {"gray", "cblack"};
  plan.horizons = {4, 8};
  plan.learning_rates = {0.01};
  plan.restarts = 2;
  plan.epochs = 10;
  plan.eval_every = 5;
  plan.bounds = constraints::default_bounds(the_plant());
  const auto cells = training::expand_cells(plan, the_plant());
  const fs::path dir = fs::temp_directory_path() / "cnode_report";
  fs::remove_all(dir);
  fs::create_directories(dir / "ck");
  training::SweepOptions opt;
  opt.checkpoint_dir = dir / "ck";
  const auto results = training::run_sweep(plan, cells, small_data(), opt);
  const CheckpointLoader load = [&](const training::SweepCell& c) {
    return models::load_checkpoint(training::checkpoint_path(dir / "ck", c));
  };
  const EvalReport rep = build_report(results, load, the_plant(), small_data(), plan.bounds);
  REQUIRE(rep.models.size() == 2);
  CHECK(rep.best_nstep.size() == 4);
  CHECK(rep.eigen.size() == 3);
  for (const auto& m : rep.models) {
    for (const auto& r : results)
      if (r.cell.label == m.result.cell.label) CHECK(m.result.openloop_mse_val <= r.openloop_mse_val);
  }
  export_artifacts(rep, the_plant(), small_data(), dir);

  for (const char* t : {"results.csv", "best_cells.csv", "best_nstep.csv", "best_openloop.csv", "eigenvalues.csv",
                        "slack.csv", "transition_gray.csv", "transition_cblack.csv"}) {
    CHECK(fs::exists(dir / "tables" / t));
  }
  for (const char* f : {"nstep_mse_vs_N.svg", "openloop_mse_vs_N.svg", "openloop_gray.svg", "openloop_cblack.svg"}) {
    CHECK(fs::exists(dir / "figures" / f));
  }
  std::size_t traces = 0;
  for (const auto& e : fs::directory_iterator(dir / "traces")) traces += e.path().extension() == ".csv";
  CHECK(traces == 2 * 3);

  const Matrix t = read_matrix_csv(dir / "tables" / "transition_gray.csv");
  CHECK(t == rep.models[0].transition);

  // Re-score the test trace from the file alone.
  const auto lines = read_lines(dir / "traces" / "gray_test.csv");
  REQUIRE(lines.size() == small_data().test.steps() + 2);
  CHECK(lines[0] == "k,x1_true,x2_true,x3_true,x4_true,x1_pred,x2_pred,x3_pred,x4_pred,u_true,u_pred");
  double sse = 0.0;
  for (std::size_t k = 2; k < lines.size(); ++k) {
    const auto v = split_numbers(lines[k]);
    sse += (v[4] - v[8]) * (v[4] - v[8]);
  }
  CHECK_THAT(sse / static_cast<double>(small_data().test.steps()),
             WithinRel(rep.models[0].result.openloop_mse_test, 1e-12));
}
