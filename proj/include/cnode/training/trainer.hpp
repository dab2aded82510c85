#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <cnode/analysis/metrics.hpp>
#include <cnode/autodiff/tape.hpp>
#include <cnode/constraints/bounds.hpp>
#include <cnode/models/model.hpp>
#include <cnode/numerics/rng.hpp>
#include <cnode/plant/plant.hpp>
#include <cnode/training/adamw.hpp>
#include <cnode/training/loss.hpp>
#include <cnode/training/windows.hpp>

namespace cnode::training {

/// Settings for one training run (one sweep cell).
struct TrainConfig {
  std::size_t horizon = 32;
  std::size_t epochs = 2000;
  double learning_rate = 0.01;
  double weight_decay = 0.01;
  AdamWSettings adam;
  std::size_t stride = 1;
  std::size_t eval_every = 100;
  std::uint64_t seed = 0;
  std::size_t restart = 0;
  constraints::BoundSpec bounds;
  /// Parameter names held constant during training.
  std::set<std::string> frozen;
  /// Starting point; random initialisation from (seed, restart) when absent.
  std::optional<models::ParamSet> initial;

  void validate() const {
    if (horizon == 0) throw ConfigError("horizon must be at least 1");
    if (!(learning_rate >= 0.0 && learning_rate < 1.0)) throw ConfigError("learning rate must lie in [0, 1)");
    if (weight_decay < 0.0) throw ConfigError("weight decay must be nonnegative");
    if (stride == 0 || eval_every == 0) throw ConfigError("stride and eval_every must be positive");
    bounds.validate();
  }
};

struct TrainRecord {
  std::vector<double> loss_trace;                         // training loss per epoch
  std::vector<std::pair<std::size_t, double>> val_trace;  // (epoch, validation N-step MSE)
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;
  models::ParamSet best_params;
  models::ParamSet final_params;
  double wall_seconds = 0.0;
  bool failed = false;
  std::string failure;
};

/// Independent initialisation stream for restart r of a run seeded with `seed`.
inline SeededRng restart_rng(std::uint64_t seed, std::size_t restart) {
  return SeededRng(seed).split(static_cast<std::uint64_t>(restart));
}

/// Training loss and gradients for the full batch of windows.
inline std::pair<double, NamedGradients> loss_and_gradients(const models::ModelSpec& spec, const models::ParamSet& params,
                                                            const plant::Partition& part, const WindowSet& windows,
                                                            const TrainConfig& cfg, std::size_t observed) {
  ad::Tape tape;
  tape.reserve(16 * windows.horizon + 64);
  const models::ModelVars mv = models::bind_params(tape, spec, params, cfg.frozen);
  const models::RolloutGraph g = models::rollout_graph(tape, spec, mv, tape.constant(windows.x0), part.signals, 0,
                                                       windows.horizon, spec.constrained ? &cfg.bounds : nullptr,
                                                       windows.stride);
  const ad::Var loss = nstep_loss(g, tape.constant(windows.targets), observed, cfg.bounds.lambda, cfg.bounds.mu);
  const double value = tape.value(loss).item();
  if (!std::isfinite(value)) throw NumericError("training loss is not finite");
  tape.backward(loss);
  NamedGradients grads;
  for (const auto& [name, var] : mv.leaves) {
    if (tape.trainable(var)) grads.emplace_back(name, tape.grad(var));
  }
  return {value, std::move(grads)};
}

/**
 * Full-batch AdamW on the N-step loss. Validation N-step MSE is measured at
 * the start, every eval_every epochs and after the last epoch; the parameters
 * with the lowest value are kept. A non-finite loss or gradient ends the run
 * and marks it failed instead of throwing.
 */
inline TrainRecord train(const models::ModelSpec& spec, const TrainConfig& cfg, const plant::Dataset& data) {
  spec.validate();
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();
  TrainRecord rec;
  models::ParamSet params;
  if (cfg.initial) {
    params = *cfg.initial;
    models::check_params(spec, params);
  } else {
    SeededRng rng = restart_rng(cfg.seed, cfg.restart);
    params = models::init_params(spec, rng);
  }
  for (const auto& name : cfg.frozen) {
    if (!params.contains(name)) throw ConfigError("frozen parameter '" + name + "' not in " + spec.label());
  }

  const std::size_t observed = data.observed_index;
  const WindowSet windows = make_windows(data.train, cfg.horizon, observed, cfg.stride);
  auto validate_now = [&](std::size_t epoch) {
    const double v = analysis::nstep_mse_eval(spec, params, data.val, cfg.horizon, observed);
    rec.val_trace.emplace_back(epoch, v);
    if (v < rec.best_val || rec.val_trace.size() == 1) {
      rec.best_val = v;
      rec.best_epoch = epoch;
      rec.best_params = params;
    }
  };

  validate_now(0);
  OptimizerState opt;
  rec.loss_trace.reserve(cfg.epochs);
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    try {
      auto [loss, grads] = loss_and_gradients(spec, params, data.train, windows, cfg, observed);
      rec.loss_trace.push_back(loss);
      adamw_step(params, grads, opt, cfg.learning_rate, cfg.weight_decay, cfg.adam);
      if (!params.all_finite()) throw NumericError("parameters became non-finite");
    } catch (const NumericError& e) {
      rec.failed = true;
      rec.failure = "epoch " + std::to_string(epoch) + ": " + e.what();
      break;
    }
    if (epoch % cfg.eval_every == 0 || epoch == cfg.epochs) validate_now(epoch);
  }
  rec.final_params = params;
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return rec;
}

}  // namespace cnode::training
