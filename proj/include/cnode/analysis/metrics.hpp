#pragma once

#include <cmath>
#include <cstddef>
#include <limits>

#include <cnode/autodiff/tape.hpp>
#include <cnode/constraints/bounds.hpp>
#include <cnode/errors.hpp>
#include <cnode/models/model.hpp>
#include <cnode/plant/plant.hpp>
#include <cnode/training/loss.hpp>
#include <cnode/training/windows.hpp>

namespace cnode::analysis {

struct OpenLoopResult {
  double mse = std::numeric_limits<double>::infinity();
  bool diverged = false;
  models::RolloutResult rollout;  // empty when diverged
};

/**
 * Simulates the whole partition from its first state and scores the observed
 * state: (1/T) sum_{k=1..T} (x_{k,i} - x~_{k,i})^2. Divergence is reported as
 * an infinite MSE with the flag set rather than thrown.
 */
inline OpenLoopResult open_loop(const models::ModelSpec& spec, const models::ParamSet& params,
                                const plant::Partition& part, const constraints::BoundSpec& bounds,
                                std::size_t observed = plant::kObservedState) {
  OpenLoopResult out;
  const std::size_t steps = part.steps();
  try {
    out.rollout = models::rollout(params, spec, part.x0(), part.signals, steps, bounds);
  } catch (const NumericError&) {
    out.diverged = true;
    return out;
  }
  double s = 0.0;
  for (std::size_t k = 1; k <= steps; ++k) {
    const double e = part.states(k, observed) - out.rollout.states(k, observed);
    s += e * e;
  }
  out.mse = s / static_cast<double>(steps);
  if (!std::isfinite(out.mse)) {
    out.diverged = true;
    out.mse = std::numeric_limits<double>::infinity();
  }
  return out;
}

inline double open_loop_mse(const models::ModelSpec& spec, const models::ParamSet& params, const plant::Partition& part,
                            std::size_t observed = plant::kObservedState) {
  models::ModelSpec plain = spec;
  plain.constrained = false;
  return open_loop(plain, params, part, constraints::BoundSpec{}, observed).mse;
}

/**
 * Mean over stride-1 windows of the observed-state MSE across N steps; slack
 * penalties are not part of this metric. Infinite when a rollout diverges.
 */
inline double nstep_mse_eval(const models::ModelSpec& spec, const models::ParamSet& params, const plant::Partition& part,
                             std::size_t horizon, std::size_t observed = plant::kObservedState) {
  const training::WindowSet w = training::make_windows(part, horizon, observed);
  try {
    ad::Tape tape;
    tape.reserve(8 * horizon + 64);
    const models::ModelVars mv = models::bind_params(tape, spec, params);
    const models::RolloutGraph g =
        models::rollout_graph(tape, spec, mv, tape.constant(w.x0), part.signals, 0, horizon, nullptr);
    const double v = tape.value(training::nstep_loss(g, tape.constant(w.targets), observed, 0.0, 0.0)).item();
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  } catch (const NumericError&) {
    return std::numeric_limits<double>::infinity();
  }
}

/// Mean and max of the per-step violation total |s^x_k|_1 + |s^u_k| over a rollout.
struct SlackSummary {
  double mean = 0.0;
  double max = 0.0;
};

inline SlackSummary violation_summary(const Matrix& slack_x, const Matrix& slack_u) {
  SlackSummary s;
  const std::size_t steps = slack_x.rows();
  if (steps == 0) return s;
  for (std::size_t k = 0; k < steps; ++k) {
    double v = slack_u[k];
    for (std::size_t i = 0; i < slack_x.cols(); ++i) v += slack_x(k, i);
    s.mean += v;
    s.max = std::max(s.max, v);
  }
  s.mean /= static_cast<double>(steps);
  return s;
}

/**
 * Violations of a rollout against bounds, computed regardless of whether the
 * model was trained with penalties. Used to compare constrained and
 * unconstrained models on equal terms.
 */
inline SlackSummary rollout_violations(const models::RolloutResult& r, const models::ModelSpec& spec,
                                       const constraints::BoundSpec& bounds) {
  const std::size_t steps = r.u.rows();
  const Matrix states = block(r.states, 1, steps + 1, 0, r.states.cols());
  const auto sx = constraints::bound_slacks(states, bounds.lower_rows(1, steps), bounds.upper_rows(1, steps)).joint();
  Matrix un(steps, 1);
  for (std::size_t k = 0; k < steps; ++k) un[k] = r.u[k] / spec.scaling.u;
  const auto su = constraints::bound_slacks(un, Matrix(steps, 1, bounds.u_lower / spec.scaling.u),
                                            Matrix(steps, 1, bounds.u_upper / spec.scaling.u))
                      .joint();
  return violation_summary(sx, su);
}

}  // namespace cnode::analysis
