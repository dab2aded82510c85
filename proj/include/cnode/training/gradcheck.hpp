#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include <cnode/errors.hpp>
#include <cnode/models/model.hpp>
#include <cnode/plant/plant.hpp>
#include <cnode/training/trainer.hpp>
#include <cnode/training/windows.hpp>

namespace cnode::training {

/// First `steps` transitions of a partition as a partition of its own.
inline plant::Partition head(const plant::Partition& p, std::size_t steps) {
  if (steps == 0 || steps > p.steps()) throw ArgumentError("head: steps out of range for " + p.name);
  plant::Partition out;
  out.name = p.name;
  out.start_step = p.start_step;
  out.states = block(p.states, 0, steps + 1, 0, p.states.cols());
  out.signals = p.signals.slice(0, steps + 1);
  return out;
}

/**
 * Central differences on the full training objective (fit plus slack
 * penalties) against the tape gradient, for every parameter entry of
 * every non-frozen parameter. Returns the worst relative error
 * |g - fd| / (1e-8 + |g| + |fd|).
 */
inline double rollout_gradient_check(const models::ModelSpec& spec, const models::ParamSet& params,
                                     const plant::Partition& part, const TrainConfig& cfg, std::size_t observed,
                                     double eps = 1e-6) {
  const WindowSet windows = make_windows(part, cfg.horizon, observed, cfg.stride);
  const NamedGradients grads = loss_and_gradients(spec, params, part, windows, cfg, observed).second;
  models::ParamSet work = params;
  double worst = 0.0;
  for (const auto& [name, g] : grads) {
    Matrix& m = work.at(name);
    for (std::size_t k = 0; k < m.size(); ++k) {
      const double orig = m[k];
      m[k] = orig + eps;
      const double fp = loss_and_gradients(spec, work, part, windows, cfg, observed).first;
      m[k] = orig - eps;
      const double fm = loss_and_gradients(spec, work, part, windows, cfg, observed).first;
      m[k] = orig;
      const double fd = (fp - fm) / (2.0 * eps);
      worst = std::max(worst, std::abs(g[k] - fd) / (1e-8 + std::abs(g[k]) + std::abs(fd)));
    }
  }
  return worst;
}

}  // namespace cnode::training
