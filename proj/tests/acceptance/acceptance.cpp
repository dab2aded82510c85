// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include <cnode/analysis/report.hpp>
#include <cnode/autodiff/op_cases.hpp>
#include <cnode/cli/app.hpp>
#include <cnode/cli/commands.hpp>
#include <cnode/cli/process.hpp>
#include <cnode/models/stability.hpp>
#include <cnode/numerics/eigen.hpp>
#include <cnode/training/gradcheck.hpp>
#include <cnode/training/sweep.hpp>

namespace fs = std::filesystem;
using namespace cnode;

namespace {

constexpr std::uint64_t kSeed = 7;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Context {
  fs::path scratch;
  std::size_t jobs = 1;
  bool full = false;
  plant::PlantSystem plant = plant::build_default_plant();
  plant::Dataset data;
};

std::string fmt(double v, const char* f = "%.4g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 4x4 (or smaller) complex determinant by cofactor expansion; independent of the QR solver.
std::complex<double> det(const std::vector<std::vector<std::complex<double>>>& m) {
  const std::size_t n = m.size();
  if (n == 1) return m[0][0];
  std::complex<double> d = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<std::vector<std::complex<double>>> minor;
    for (std::size_t i = 1; i < n; ++i) {
      std::vector<std::complex<double>> row;
      for (std::size_t k = 0; k < n; ++k)
        if (k != j) row.push_back(m[i][k]);
      minor.push_back(row);
    }
    d += (j % 2 == 0 ? 1.0 : -1.0) * m[0][j] * det(minor);
  }
  return d;
}

double frobenius(const Matrix& a) {
  double s = 0.0;
  for (double v : a.values()) s += v * v;
  return std::sqrt(s);
}

Outcome spectral_stability(Context&) {
  const auto s = models::pf_stability_check(1000, kSeed, 4, 10.0);
  return {s.violations == 0, std::to_string(s.violations) + " violations in 1000 draws; entries >= " + fmt(s.min_entry) +
                                 ", row sums in [" + fmt(s.min_row_sum, "%.6f") + ", " + fmt(s.max_row_sum, "%.6f") +
                                 "], max radius " + fmt(s.max_radius, "%.8f")};
}

Outcome autodiff(Context& ctx) {
  double op_worst = 0.0;
  std::string worst_kind;
  for (const auto& s : ad::check_all_ops(100, kSeed, 1e-5)) {
    if (s.worst >= op_worst) op_worst = s.worst, worst_kind = ad::to_string(s.kind);
  }
  training::TrainConfig cfg;
  cfg.horizon = 4;
  cfg.bounds = constraints::default_bounds(ctx.plant);
  cfg.bounds.x_upper.fill(21.0);  // keeps the state penalty active in the checked loss
  const auto part = training::head(ctx.data.train, 32);
  double roll_worst = 0.0;
  for (const char* label : {"black", "gray", "white", "cblack", "cgray", "cwhite", "srnn"}) {
    const auto spec = models::spec_from_label(label, ctx.plant);
    SeededRng rng = training::restart_rng(kSeed, 0);
    const auto params = models::init_params(spec, rng);
    roll_worst = std::max(roll_worst,
                          training::rollout_gradient_check(spec, params, part, cfg, ctx.data.observed_index));
  }
  return {op_worst < 1e-5 && roll_worst < 1e-4, "19 op kinds x 100 cases: worst rel err " + fmt(op_worst) + " (" +
                                                     worst_kind + "); N=4 rollout loss, 7 models: " + fmt(roll_worst)};
}

Outcome eigensolver(Context&) {
  SeededRng rng(kSeed);
  double worst = 0.0;
  for (int t = 0; t < 500; ++t) {
    const double scale = std::pow(10.0, rng.uniform(-2.0, 2.0));
    const Matrix a = scale * rng_uniform(rng, -1.0, 1.0, 4, 4);
    const double tol = 1e-6 * (1.0 + frobenius(a));
    for (const auto& lambda : eigenvalues(a)) {
      std::vector<std::vector<std::complex<double>>> m(4, std::vector<std::complex<double>>(4));
      for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) m[i][j] = a(i, j) - (i == j ? lambda : ComplexScalar(0.0));
      worst = std::max(worst, std::abs(det(m)) / tol);
    }
  }
  double tri_err = 0.0;
  for (int t = 0; t < 200; ++t) {
    Matrix a = rng_uniform(rng, -2.0, 2.0, 4, 4);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j)
        if (t % 2 == 0 ? j < i : j > i) a(i, j) = 0.0;
    std::vector<ComplexScalar> diag;
    for (std::size_t i = 0; i < 4; ++i) diag.emplace_back(a(i, i), 0.0);
    sort_eigenvalues(diag);
    const auto ev = eigenvalues(a);
    for (std::size_t i = 0; i < 4; ++i) tri_err = std::max(tri_err, std::abs(ev[i] - diag[i]));
  }
  return {worst < 1.0 && tri_err < 1e-12, "500 random: max |det(A - lI)| / (1e-6 (1 + |A|)) = " + fmt(worst) +
                                              "; 200 triangular: max diagonal error " + fmt(tri_err)};
}

Outcome ground_truth(Context& ctx) {
  const auto ev = eigenvalues(ctx.plant.A);
  const double want[] = {1.0, 0.99, 0.98, 0.25};
  double err = 0.0;
  std::string got;
  for (std::size_t i = 0; i < 4; ++i) {
    err = std::max(err, std::abs(ev[i] - ComplexScalar(want[i], 0.0)));
    got += (i ? " " : "") + analysis::format_eigenvalue(ev[i]);
  }
  return {ev.size() == 4 && err < 1e-9, "spectrum " + got + ", max error " + fmt(err)};
}

Outcome exact_model(Context& ctx) {
  auto [spec, params] = models::truth_model(ctx.plant, models::AlgebraicVariant::white, true);
  training::TrainConfig cfg;
  cfg.horizon = 32;
  cfg.bounds = constraints::default_bounds(ctx.plant);
  const std::size_t obs = ctx.data.observed_index;
  const auto windows = training::make_windows(ctx.data.train, cfg.horizon, obs);
  const double loss = training::loss_and_gradients(spec, params, ctx.data.train, windows, cfg, obs).first;
  double ol = 0.0;
  for (const auto* part : {&ctx.data.train, &ctx.data.val, &ctx.data.test})
    ol = std::max(ol, analysis::open_loop_mse(spec, params, *part, obs));
  return {loss < 1e-12 && ol < 1e-12, "N=32 training loss " + fmt(loss) + ", worst open-loop MSE " + fmt(ol)};
}

Outcome gray_recovery(Context& ctx) {
  const auto truth = models::truth_model(ctx.plant, models::AlgebraicVariant::gray);
  const models::ModelSpec& spec = truth.first;
  double worst = 0.0;
  std::string detail;
  for (std::size_t r = 0; r < 3; ++r) {
    SeededRng rng = training::restart_rng(kSeed, r);
    models::ParamSet init = models::init_params(spec, rng);  // random H_gain on (0, 2 H)
    for (const char* name : {"A_raw", "B", "E"}) init.set(name, truth.second.at(name));
    training::TrainConfig cfg;
    cfg.horizon = 32;
    cfg.learning_rate = 0.01;
    cfg.epochs = 2000;
    cfg.seed = kSeed;
    cfg.restart = r;
    cfg.bounds = constraints::default_bounds(ctx.plant);
    cfg.frozen = {"A_raw", "B", "E"};
    cfg.initial = init;
    const auto rec = training::train(spec, cfg, ctx.data);
    const double h0 = models::gray_constants(spec, init).first;
    const double h = models::gray_constants(spec, rec.best_params).first;
    const double rel = std::abs(h - ctx.plant.H) / ctx.plant.H;
    worst = std::max(worst, rec.failed ? 1.0 : rel);
    detail += (r ? "; " : "") + std::string("r") + std::to_string(r) + ": " + fmt(h0, "%.0f") + " -> " + fmt(h, "%.2f");
  }
  return {worst < 0.05, "H = " + fmt(ctx.plant.H, "%.0f") + "; " + detail + "; worst rel err " + fmt(worst)};
}

training::SweepPlan base_plan(const Context& ctx) {
  training::SweepPlan plan;
  plan.seed = kSeed;
  plan.bounds = constraints::default_bounds(ctx.plant);
  return plan;
}

Outcome trend(Context& ctx) {
  training::SweepPlan plan = base_plan(ctx);
  plan.labels = {"cgray"};
  plan.horizons = {8, 128};
  const auto cells = training::expand_cells(plan, ctx.plant);
  training::SweepOptions opt;
  opt.jobs = ctx.jobs;
  const auto results = training::run_sweep(plan, cells, ctx.data, opt);
  auto pick = [](const std::vector<training::CellResult>& best, std::size_t n) {
    for (const auto& r : best)
      if (r.cell.horizon == n) return r;
    throw Error("no result for N=" + std::to_string(n));
  };
  const auto by_nstep = training::best_cells(results, training::SelectBy::nstep_val);
  const auto by_open = training::best_cells(results, training::SelectBy::openloop_val);
  const double ol8 = pick(by_open, 8).openloop_mse_test, ol128 = pick(by_open, 128).openloop_mse_test;
  const double ns8 = pick(by_nstep, 8).nstep_mse_test, ns128 = pick(by_nstep, 128).nstep_mse_test;
  const std::size_t failed = std::count_if(results.begin(), results.end(), [](const auto& r) { return r.failed; });
  return {ol128 < ol8 && ns128 > ns8,
          std::to_string(cells.size()) + " cells (" + std::to_string(failed) + " failed); best open-loop test N=8 " +
              fmt(ol8) + " > N=128 " + fmt(ol128) + "; best N-step test N=8 " + fmt(ns8) + " < N=128 " + fmt(ns128)};
}

Outcome constraint_efficacy(Context& ctx) {
  // Bounds that bind: the training-state envelope widened by 1 degC.
  training::SweepPlan plan = base_plan(ctx);
  constraints::set_envelope(plan.bounds, ctx.data.train.states, 1.0);
  plan.labels = {"black", "cblack", "gray", "cgray", "white", "cwhite"};
  plan.horizons = {128};
  plan.learning_rates = {0.01};
  plan.restarts = 1;
  const auto cells = training::expand_cells(plan, ctx.plant);
  training::SweepOptions opt;
  opt.jobs = ctx.jobs;
  opt.checkpoint_dir = ctx.scratch / "c8";
  fs::remove_all(opt.checkpoint_dir);
  fs::create_directories(opt.checkpoint_dir);
  const auto results = training::run_sweep(plan, cells, ctx.data, opt);

  bool pass = true;
  std::string detail;
  std::vector<double> mean(cells.size());
  double lo = 2.0, hi = 0.0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto ck = models::load_checkpoint(training::checkpoint_path(opt.checkpoint_dir, cells[i]));
    const auto ol = analysis::open_loop(ck.spec, ck.params, ctx.data.test, plan.bounds, ctx.data.observed_index);
    pass = pass && !ol.diverged && !results[i].failed;
    mean[i] = ol.diverged ? INFINITY : analysis::rollout_violations(ol.rollout, ck.spec, plan.bounds).mean;
    const double dom = std::abs(eigenvalues(models::effective_transition(ck.spec, ck.params)).front());
    lo = std::min(lo, dom), hi = std::max(hi, dom);
    pass = pass && dom >= 0.9 && dom < 1.0;
  }
  for (std::size_t i = 0; i + 1 < cells.size(); i += 2) {
    const double ratio = mean[i + 1] / mean[i];
    pass = pass && mean[i + 1] <= 0.1 * mean[i];
    detail += cells[i + 1].label + " " + fmt(mean[i + 1]) + " vs " + fmt(mean[i]) + " (" + fmt(100 * ratio, "%.2f") +
              "%); ";
  }
  return {pass, "N=128 mean test slack " + detail + "dominant eigenvalues in [" + fmt(lo, "%.4f") + ", " +
                    fmt(hi, "%.4f") + "]"};
}

Outcome srnn_contrast(Context& ctx) {
  const auto spec = models::spec_from_label("srnn", ctx.plant);
  training::TrainConfig cfg;
  cfg.horizon = 8;
  cfg.epochs = 200;
  cfg.seed = kSeed;
  cfg.bounds = constraints::default_bounds(ctx.plant);
  const auto rec = training::train(spec, cfg, ctx.data);
  const Matrix learned = models::effective_transition(spec, rec.best_params);
  bool unconstrained = spec.transition == models::Transition::direct && !spec.constrained && !rec.failed;

  // Rotation by 0.3 rad, radius 0.95, in the first two states.
  Matrix injected = learned;
  const double c = 0.95 * std::cos(0.3), s = 0.95 * std::sin(0.3);
  for (std::size_t j = 0; j < 4; ++j) injected(0, j) = injected(1, j) = 0.0;
  injected(0, 0) = c, injected(0, 1) = -s, injected(1, 0) = s, injected(1, 1) = c;

  const auto rows = analysis::eigen_report({{"srnn", learned}, {"srnn_rotation", injected}}, ctx.plant);
  std::ostringstream csv;
  analysis::write_eigen_csv(csv, rows);
  const auto& rot = rows.back().values;
  bool pair = false;
  for (std::size_t i = 0; i + 1 < rot.size(); ++i)
    pair = pair || (rot[i].imag() > 0 && std::abs(rot[i + 1] - std::conj(rot[i])) < 1e-12);
  const std::string plus = analysis::format_eigenvalue({c, s}), minus = analysis::format_eigenvalue({c, -s});
  const std::string text = csv.str();
  const bool printed = text.find(plus) != std::string::npos && text.find(minus) != std::string::npos;
  return {unconstrained && pair && printed, std::string("srnn transition direct, unpenalised, trained ") +
                                                (rec.failed ? "with failure" : "cleanly") + "; injected row prints " +
                                                plus + " and " + minus};
}

int run_cli(const std::vector<std::string>& args, std::ostream& out) {
  std::vector<const char*> argv{"cnode"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) std::cerr << err.str();
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism(Context& ctx) {
  std::vector<std::string> grid;
  if (!ctx.full) {
    grid = {"--variants", "black", "gray", "white", "cblack", "cgray", "cwhite", "srnn",
            "--N", "8", "16", "--lr", "0.01", "--restarts", "1", "--epochs", "300"};
  }
  std::vector<std::string> compared;
  std::string mismatch;
  std::ostringstream log;
  const std::vector<std::string> jobs = {"1", std::to_string(std::max<std::size_t>(2, ctx.jobs))};
  for (int run = 0; run < 2; ++run) {
    const std::string id = "c10_" + std::to_string(run);
    fs::remove_all(ctx.scratch / id);
    std::vector<std::string> common{"--seed", std::to_string(kSeed), "--out", ctx.scratch.string(), "--run-id", id};
    auto with = [&](std::string cmd, std::vector<std::string> extra) {
      std::vector<std::string> a{std::move(cmd)};
      a.insert(a.end(), common.begin(), common.end());
      a.insert(a.end(), extra.begin(), extra.end());
      return a;
    };
    std::vector<std::string> train_args = grid;
    train_args.insert(train_args.end(), {"--jobs", jobs[run]});
    if (run_cli(with("simulate", {}), log) != 0 || run_cli(with("train", train_args), log) != 0 ||
        run_cli(with("report", grid), log) != 0) {
      return {false, "cli run " + std::to_string(run) + " failed"};
    }
  }
  for (const auto& entry : fs::directory_iterator(ctx.scratch / "c10_0" / "tables")) {
    const auto name = entry.path().filename();
    compared.push_back(name.string());
    if (slurp(entry.path()) != slurp(ctx.scratch / "c10_1" / "tables" / name)) mismatch += " " + name.string();
  }
  const bool results_same =
      slurp(ctx.scratch / "c10_0/tables/results.csv") == slurp(ctx.scratch / "c10_1/tables/results.csv") &&
      !slurp(ctx.scratch / "c10_0/tables/results.csv").empty();
  return {results_same && mismatch.empty(),
          std::string(ctx.full ? "full desk grid" : "reduced grid (7 models, N 8/16, 300 epochs)") +
              ", jobs 1 vs " + jobs[1] + ": " + std::to_string(compared.size()) + " tables compared" +
              (mismatch.empty() ? ", all byte-identical" : ", differ:" + mismatch)};
}

}  // namespace

int main(int argc, char** argv) {
  cli::tune_allocator();
  CLI::App app{"Acceptance criteria 1-10"};
  Context ctx;
  std::string scratch = (fs::temp_directory_path() / "cnode_acceptance").string();
  std::vector<int> only;
  ctx.jobs = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--scratch", scratch, "working directory for checkpoints and runs");
  app.add_option("--only", only, "run only these criteria");
  app.add_option("--jobs", ctx.jobs, "sweep workers");
  app.add_flag("--full", ctx.full, "criterion 10 on the full desk-preset grid");
  CLI11_PARSE(app, argc, argv);
  ctx.scratch = scratch;
  fs::create_directories(ctx.scratch);

  SeededRng data_rng = SeededRng(kSeed).split(cli::kDataStream);
  ctx.data = plant::make_dataset(ctx.plant, data_rng);

  struct Criterion {
    int id;
    const char* name;
    double budget_seconds;  // 0: no runtime limit
    std::function<Outcome(Context&)> run;
  };
  const std::vector<Criterion> criteria{
      {1, "spectral stability", 5, spectral_stability},
      {2, "autodiff correctness", 30, autodiff},
      {3, "eigensolver oracle", 0, eigensolver},
      {4, "ground-truth spectrum", 0, ground_truth},
      {5, "exact-model sanity", 0, exact_model},
      {6, "gray-box recovery", 120, gray_recovery},
      {7, "trend reproduction", 600, trend},
      {8, "constraint efficacy", 0, constraint_efficacy},
      {9, "S-RNN contrast", 0, srnn_contrast},
      {10, "determinism", 0, determinism},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.budget_seconds == 0 || secs < c.budget_seconds;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("%s %2d %-22s %s [%.1f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                c.budget_seconds > 0 ? (in_time ? (" < " + fmt(c.budget_seconds, "%.0f") + " s").c_str()
                                                : (" over " + fmt(c.budget_seconds, "%.0f") + " s budget").c_str())
                                     : "");
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
