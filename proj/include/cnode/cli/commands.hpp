#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include <cnode/analysis/report.hpp>
#include <cnode/autodiff/op_cases.hpp>
#include <cnode/cli/config.hpp>
#include <cnode/errors.hpp>
#include <cnode/models/checkpoint.hpp>
#include <cnode/models/model.hpp>
#include <cnode/models/stability.hpp>
#include <cnode/numerics/csv.hpp>
#include <cnode/numerics/eigen.hpp>
#include <cnode/numerics/rng.hpp>
#include <cnode/plant/plant.hpp>
#include <cnode/training/gradcheck.hpp>
#include <cnode/training/sweep.hpp>

namespace cnode::cli {

/// RNG stream of the synthetic signals; restarts use streams 0, 1, 2, ...
inline constexpr std::uint64_t kDataStream = 0xd47a5e7;

/// Exit codes of the command-line tool.
enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNumericFailure = 3 };

inline std::size_t resolve_jobs(std::size_t jobs) {
  if (jobs > 0) return jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

/// Builds the dataset named by the config without touching the run directory.
inline plant::Dataset build_dataset(const RunConfig& c, const plant::PlantSystem& p) {
  if (c.dataset_source == "synthetic") {
    SeededRng rng = SeededRng(c.seed).split(kDataStream);
    return plant::make_dataset(p, rng);
  }
  if (c.dataset_path.empty()) throw ConfigError("dataset.path is required for source '" + c.dataset_source + "'");
  if (c.dataset_source == "signals") return plant::make_dataset(p, plant::load_signals_csv(c.dataset_path));
  if (c.dataset_source == "csv") return plant::load_dataset(c.dataset_path);
  throw ConfigError("dataset.source must be synthetic, signals or csv, got '" + c.dataset_source + "'");
}

inline plant::Dataset load_run_dataset(const RunConfig& c) {
  const auto dir = c.data_dir();
  if (!std::filesystem::exists(dir / "train.csv")) {
    throw IoError("no dataset in " + dir.string() + "; run 'simulate' first");
  }
  return plant::load_dataset(dir);
}

inline nlohmann::json spectrum_json(const std::vector<ComplexScalar>& ev) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& z : ev) out.push_back({{"re", z.real()}, {"im", z.imag()}});
  return out;
}

// ---- simulate -------------------------------------------------------------------

inline int cmd_simulate(const RunConfig& c, std::ostream& out) {
  const plant::PlantSystem p = make_plant(c);
  const plant::Dataset ds = build_dataset(c, p);
  const auto dir = c.data_dir();
  ensure_dir(dir);
  plant::write_dataset(dir, ds);

  const auto ev = eigenvalues(p.A);
  nlohmann::json manifest{
      {"run_id", c.resolved_run_id()},
      {"seed", c.seed},
      {"source", c.dataset_source},
      {"observed_index", ds.observed_index},
      {"sample_seconds", p.sample_seconds},
      {"plant",
       {{"A", models::matrix_to_json(p.A)},
        {"B", models::matrix_to_json(p.B)},
        {"E", models::matrix_to_json(p.E)},
        {"H", p.H},
        {"h", p.h},
        {"u_max", p.u_max()}}},
      {"eigenvalues", spectrum_json(ev)},
      {"partitions", nlohmann::json::object()},
  };
  for (const plant::Partition* part : {&ds.train, &ds.val, &ds.test}) {
    manifest["partitions"][part->name] = {{"file", part->name + ".csv"},
                                          {"start_step", part->start_step},
                                          {"rows", part->states.rows()},
                                          {"steps", part->steps()}};
  }
  {
    auto f = open_for_write(dir / "manifest.json");
    f << manifest.dump(2) << '\n';
    if (!f) throw IoError("write failed: " + (dir / "manifest.json").string());
  }

  out << "wrote " << dir.string() << " (train/val/test, " << ds.train.steps() << " steps each)\n";
  out << "plant eigenvalues:";
  for (const auto& z : ev) out << ' ' << analysis::format_eigenvalue(z);
  out << '\n';
  return kOk;
}

// ---- train ----------------------------------------------------------------------

/// Refuses to resume from checkpoints written under different settings.
inline void check_resumable(const training::SweepPlan& plan, const std::vector<training::SweepCell>& cells,
                            const std::filesystem::path& dir) {
  for (const auto& cell : cells) {
    const auto path = training::checkpoint_path(dir, cell);
    if (!std::filesystem::exists(path)) continue;
    const auto meta = models::load_checkpoint(path).meta;
    const bool same = meta.value("key", "") == cell.key() && meta.value("seed", std::uint64_t{0}) == plan.seed &&
                      meta.value("epochs", std::size_t{0}) == plan.epochs;
    if (!same) {
      throw ConfigError("checkpoint " + path.string() +
                        " was written with a different seed or epoch count; use a new run_id or remove it");
    }
  }
}

inline void print_best(std::ostream& out, const std::vector<training::CellResult>& best, const char* title) {
  out << title << '\n';
  for (const auto& r : best) {
    out << "  " << r.cell.label << " N=" << r.cell.horizon << " lr=" << format_double(r.cell.learning_rate)
        << " r=" << r.cell.restart << "  nstep_test=" << format_double(r.nstep_mse_test)
        << "  openloop_test=" << format_double(r.openloop_mse_test) << (r.failed ? "  (failed)" : "") << '\n';
  }
}

inline int cmd_train(const RunConfig& c, std::ostream& out) {
  const plant::PlantSystem p = make_plant(c);
  const plant::Dataset ds = load_run_dataset(c);
  const training::SweepPlan plan = make_plan(c, p, &ds);
  const auto cells = training::expand_cells(plan, p);
  const auto ckdir = c.checkpoint_dir();
  ensure_dir(ckdir);
  check_resumable(plan, cells, ckdir);

  training::SweepOptions opt;
  opt.jobs = resolve_jobs(c.jobs);
  opt.checkpoint_dir = ckdir;
  std::size_t done = 0;
  opt.on_cell_done = [&](const training::CellResult& r) {
    ++done;
    out << '[' << done << '/' << cells.size() << "] " << r.cell.key()
        << (r.resumed ? " resumed" : r.failed ? " failed: " + r.failure : "")
        << "  nstep_val=" << format_double(r.nstep_mse_val) << '\n'
        << std::flush;
  };
  const auto results = training::run_sweep(plan, cells, ds, opt);

  ensure_dir(c.run_dir() / "tables");
  training::write_results_csv(c.run_dir() / "tables" / "results.csv", results);
  print_best(out, training::best_cells(results, training::SelectBy::nstep_val), "best N-step (by validation):");

  const bool all_failed = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.failed; });
  return all_failed ? kNumericFailure : kOk;
}

// ---- report ---------------------------------------------------------------------

inline int cmd_report(const RunConfig& c, std::ostream& out) {
  namespace fs = std::filesystem;
  const plant::PlantSystem p = make_plant(c);
  const auto ckdir = c.checkpoint_dir();
  if (!fs::is_directory(ckdir) || fs::is_empty(ckdir)) {
    throw IoError("no checkpoints in " + ckdir.string() + "; run 'train' first");
  }
  const plant::Dataset ds = load_run_dataset(c);
  const training::SweepPlan plan = make_plan(c, p, &ds);
  const auto cells = training::expand_cells(plan, p);
  std::vector<std::string> missing;
  for (const auto& cell : cells)
    if (!fs::exists(training::checkpoint_path(ckdir, cell))) missing.push_back(cell.key());
  if (!missing.empty()) {
    std::string msg = std::to_string(missing.size()) + " of " + std::to_string(cells.size()) + " cells missing in " +
                      ckdir.string() + ":";
    for (const auto& k : missing) msg += "\n  " + k;
    throw IoError(msg);
  }

  std::vector<training::CellResult> results;
  results.reserve(cells.size());
  for (const auto& cell : cells) {
    results.push_back(training::result_from_meta(cell, models::load_checkpoint(training::checkpoint_path(ckdir, cell)).meta));
  }
  const analysis::CheckpointLoader load = [&](const training::SweepCell& cell) {
    return models::load_checkpoint(training::checkpoint_path(ckdir, cell));
  };
  const analysis::EvalReport rep = analysis::build_report(results, load, p, ds, plan.bounds);
  analysis::export_artifacts(rep, p, ds, c.run_dir());

  print_best(out, rep.best_nstep, "best N-step (by validation):");
  print_best(out, rep.best_openloop, "best open-loop (by validation):");
  out << "eigenvalues:\n";
  analysis::write_eigen_csv(out, rep.eigen);
  out << "artifacts in " << c.run_dir().string() << '\n';
  return kOk;
}

// ---- check ----------------------------------------------------------------------

/// Self-tests: PF stability, per-op gradients, a rollout gradient, plant spectrum.
inline int cmd_check(const RunConfig& c, std::ostream& out) {
  bool ok = true;
  auto line = [&](bool pass, const std::string& what) {
    ok = ok && pass;
    out << (pass ? "PASS " : "FAIL ") << what << '\n';
  };

  const auto pf = models::pf_stability_check(1000, c.seed);
  line(pf.violations == 0, "pf transition: " + std::to_string(pf.violations) + " violations in 1000 draws, max radius " +
                               format_double(pf.max_radius));

  double op_worst = 0.0;
  for (const auto& s : ad::check_all_ops(100, c.seed)) {
    op_worst = std::max(op_worst, s.worst);
    if (!(s.worst < 1e-5)) line(false, "op " + std::string(ad::to_string(s.kind)) + " rel err " + format_double(s.worst));
  }
  line(op_worst < 1e-5, "op gradients: worst rel err " + format_double(op_worst));

  const plant::PlantSystem p = make_plant(c);
  const plant::Dataset ds = build_dataset(c, p);
  training::TrainConfig cfg;
  cfg.horizon = 4;
  cfg.bounds = constraints::default_bounds(p);
  cfg.bounds.x_upper.fill(21.0);  // tight enough that the state penalty is active
  const auto part = training::head(ds.train, 24);
  for (const char* label : {"cblack", "cgray", "srnn"}) {
    const auto spec = models::spec_from_label(label, p);
    SeededRng rng = training::restart_rng(c.seed, 0);
    const auto params = models::init_params(spec, rng);
    const double err = training::rollout_gradient_check(spec, params, part, cfg, ds.observed_index);
    line(err < 1e-4, std::string("rollout gradient (") + label + ", N=4): rel err " + format_double(err));
  }

  const auto ev = eigenvalues(p.A);
  std::string spectrum;
  for (const auto& z : ev) spectrum += ' ' + analysis::format_eigenvalue(z);
  line(ev.size() == plant::kStateDim, "plant spectrum:" + spectrum);
  return ok ? kOk : kNumericFailure;
}

}  // namespace cnode::cli
