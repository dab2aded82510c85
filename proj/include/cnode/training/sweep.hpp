#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <cnode/analysis/metrics.hpp>
#include <cnode/constraints/bounds.hpp>
#include <cnode/errors.hpp>
#include <cnode/models/checkpoint.hpp>
#include <cnode/models/model.hpp>
#include <cnode/numerics/csv.hpp>
#include <cnode/plant/plant.hpp>
#include <cnode/training/trainer.hpp>

namespace cnode::training {

/// Grids and shared settings of a sweep.
struct SweepPlan {
  std::vector<std::string> labels{"black", "gray", "white", "cblack", "cgray", "cwhite"};
  std::vector<std::size_t> horizons{8, 16, 32, 64, 128};
  std::vector<double> learning_rates{0.003, 0.01, 0.03};
  std::size_t restarts = 3;
  std::size_t epochs = 2000;
  double weight_decay = 0.01;
  std::size_t stride = 1;
  std::size_t eval_every = 100;
  std::uint64_t seed = 0;
  constraints::BoundSpec bounds;

  void validate() const {
    if (labels.empty() || horizons.empty() || learning_rates.empty() || restarts == 0) {
      throw ConfigError("sweep grids must be non-empty and restarts positive");
    }
    for (double lr : learning_rates)
      if (!(lr >= 0.0 && lr < 1.0)) throw ConfigError("learning rate " + format_double(lr) + " outside [0, 1)");
    for (std::size_t n : horizons)
      if (n == 0) throw ConfigError("horizon must be positive");
    bounds.validate();
  }
};

struct SweepCell {
  std::string label;
  models::ModelSpec spec;
  std::size_t horizon = 0;
  double learning_rate = 0.0;
  std::size_t restart = 0;

  /// Stable identifier, also the checkpoint file stem.
  std::string key() const {
    return label + "_N" + std::to_string(horizon) + "_lr" + format_double(learning_rate) + "_r" + std::to_string(restart);
  }
};

struct CellResult {
  SweepCell cell;
  double nstep_mse_val = std::numeric_limits<double>::infinity();
  double nstep_mse_test = std::numeric_limits<double>::infinity();
  double openloop_mse_val = std::numeric_limits<double>::infinity();
  double openloop_mse_test = std::numeric_limits<double>::infinity();
  bool failed = false;
  std::string failure;
  bool resumed = false;
  double wall_seconds = 0.0;
};

/// Cartesian product in (label, N, lr, restart) order.
inline std::vector<SweepCell> expand_cells(const SweepPlan& plan, const plant::PlantSystem& plant) {
  plan.validate();
  std::vector<SweepCell> cells;
  for (const auto& label : plan.labels) {
    const models::ModelSpec spec = models::spec_from_label(label, plant);
    for (std::size_t n : plan.horizons)
      for (double lr : plan.learning_rates)
        for (std::size_t r = 0; r < plan.restarts; ++r) cells.push_back({label, spec, n, lr, r});
  }
  return cells;
}

inline TrainConfig cell_config(const SweepPlan& plan, const SweepCell& cell) {
  TrainConfig cfg;
  cfg.horizon = cell.horizon;
  cfg.epochs = plan.epochs;
  cfg.learning_rate = cell.learning_rate;
  cfg.weight_decay = plan.weight_decay;
  cfg.stride = plan.stride;
  cfg.eval_every = plan.eval_every;
  cfg.seed = plan.seed;
  cfg.restart = cell.restart;
  cfg.bounds = plan.bounds;
  return cfg;
}

inline models::json result_meta(const CellResult& r, const SweepPlan& plan) {
  return models::json{
      {"key", r.cell.key()},
      {"label", r.cell.label},
      {"N", r.cell.horizon},
      {"lr", r.cell.learning_rate},
      {"restart", r.cell.restart},
      {"seed", plan.seed},
      {"epochs", plan.epochs},
      {"failed", r.failed},
      {"failure", r.failure},
      {"nstep_mse_val", models::metric_to_json(r.nstep_mse_val)},
      {"nstep_mse_test", models::metric_to_json(r.nstep_mse_test)},
      {"openloop_mse_val", models::metric_to_json(r.openloop_mse_val)},
      {"openloop_mse_test", models::metric_to_json(r.openloop_mse_test)},
  };
}

/// Restores the metrics stored with a finished cell.
inline CellResult result_from_meta(const SweepCell& cell, const models::json& meta) {
  CellResult r;
  r.cell = cell;
  try {
    r.failed = meta.at("failed").get<bool>();
    r.failure = meta.at("failure").get<std::string>();
    r.nstep_mse_val = models::metric_from_json(meta.at("nstep_mse_val"));
    r.nstep_mse_test = models::metric_from_json(meta.at("nstep_mse_test"));
    r.openloop_mse_val = models::metric_from_json(meta.at("openloop_mse_val"));
    r.openloop_mse_test = models::metric_from_json(meta.at("openloop_mse_test"));
  } catch (const models::json::exception& e) {
    throw ParseError("checkpoint " + cell.key() + ": " + e.what(), 0);
  }
  r.resumed = true;
  return r;
}

/// Trains one cell and scores its selected parameters on validation and test.
inline std::pair<CellResult, models::ParamSet> run_cell(const SweepPlan& plan, const SweepCell& cell,
                                                         const plant::Dataset& data) {
  CellResult r;
  r.cell = cell;
  const TrainRecord rec = train(cell.spec, cell_config(plan, cell), data);
  r.failed = rec.failed;
  r.failure = rec.failure;
  r.wall_seconds = rec.wall_seconds;
  const models::ParamSet& p = rec.best_params;
  const std::size_t obs = data.observed_index;
  r.nstep_mse_val = rec.best_val;
  r.nstep_mse_test = analysis::nstep_mse_eval(cell.spec, p, data.test, cell.horizon, obs);
  r.openloop_mse_val = analysis::open_loop_mse(cell.spec, p, data.val, obs);
  r.openloop_mse_test = analysis::open_loop_mse(cell.spec, p, data.test, obs);
  return {r, p};
}

inline std::filesystem::path checkpoint_path(const std::filesystem::path& dir, const SweepCell& cell) {
  return dir / (cell.key() + ".json");
}

struct SweepOptions {
  std::size_t jobs = 1;
  /// When set, each finished cell is saved here and existing cells are skipped.
  std::filesystem::path checkpoint_dir;
  std::function<void(const CellResult&)> on_cell_done;
};

/**
 * Runs every cell on a pool of `jobs` workers. Results come back in cell
 * order regardless of scheduling, so output files do not depend on the
 * number of workers.
 */
inline std::vector<CellResult> run_sweep(const SweepPlan& plan, const std::vector<SweepCell>& cells,
                                         const plant::Dataset& data, const SweepOptions& opt = {}) {
  plan.validate();
  std::vector<CellResult> results(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex report_mutex;
  std::exception_ptr error;

  auto work = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) try {
      const SweepCell& cell = cells[i];
      const auto path = opt.checkpoint_dir.empty() ? std::filesystem::path{} : checkpoint_path(opt.checkpoint_dir, cell);
      CellResult r;
      if (!path.empty() && std::filesystem::exists(path)) {
        r = result_from_meta(cell, models::load_checkpoint(path).meta);
      } else {
        try {
          auto [res, params] = run_cell(plan, cell, data);
          r = std::move(res);
          if (!path.empty()) models::save_checkpoint(path, {cell.spec, params, result_meta(r, plan)});
        } catch (const NumericError& e) {
          r.cell = cell;
          r.failed = true;
          r.failure = e.what();
        }
      }
      results[i] = r;
      if (opt.on_cell_done) {
        std::lock_guard lock(report_mutex);
        opt.on_cell_done(results[i]);
      }
    } catch (...) {
      // I/O and parse errors stop the sweep; remaining workers drain quickly.
      std::lock_guard lock(report_mutex);
      if (!error) error = std::current_exception();
      next = cells.size();
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(opt.jobs, 1, std::max<std::size_t>(cells.size(), 1));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
  return results;
}

// ---- result tables --------------------------------------------------------------

inline std::string variant_name(const models::ModelSpec& s) { return models::to_string(s.variant); }

/// Columns: variant, constrained, N, lr, restart, nstep_mse_val, nstep_mse_test, openloop_mse_test.
inline void write_results_csv(std::ostream& out, const std::vector<CellResult>& results) {
  out << "variant,constrained,N,lr,restart,nstep_mse_val,nstep_mse_test,openloop_mse_test\n";
  for (const auto& r : results) {
    out << variant_name(r.cell.spec) << ',' << (r.cell.spec.constrained ? "true" : "false") << ',' << r.cell.horizon
        << ',' << format_double(r.cell.learning_rate) << ',' << r.cell.restart << ',' << format_double(r.nstep_mse_val)
        << ',' << format_double(r.nstep_mse_test) << ',' << format_double(r.openloop_mse_test) << '\n';
  }
}

inline void write_results_csv(const std::filesystem::path& path, const std::vector<CellResult>& results) {
  auto out = open_for_write(path);
  write_results_csv(out, results);
  if (!out) throw IoError("write failed: " + path.string());
}

enum class SelectBy { nstep_val, openloop_val };

/**
 * Best cell per (label, N) by a validation metric. Ties keep the earlier
 * cell. Groups where every cell failed are still listed, with infinite
 * metrics. Order follows first appearance in `results`.
 */
inline std::vector<CellResult> best_cells(const std::vector<CellResult>& results, SelectBy by) {
  std::vector<CellResult> best;
  std::map<std::pair<std::string, std::size_t>, std::size_t> where;
  auto score = [by](const CellResult& r) { return by == SelectBy::nstep_val ? r.nstep_mse_val : r.openloop_mse_val; };
  for (const auto& r : results) {
    const auto key = std::make_pair(r.cell.label, r.cell.horizon);
    auto it = where.find(key);
    if (it == where.end()) {
      where.emplace(key, best.size());
      best.push_back(r);
    } else if (score(r) < score(best[it->second])) {
      best[it->second] = r;
    }
  }
  return best;
}

}  // namespace cnode::training
