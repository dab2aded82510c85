#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include <cnode/autodiff/tape.hpp>
#include <cnode/errors.hpp>
#include <cnode/models/model.hpp>

namespace cnode::training {

/**
 * Multi-objective N-step loss on the tape:
 *   1/(N W) sum_k sum_w [ (x~_{k,i} - x_{k,i})^2 + lambda |s^x_k|^2 + mu |s^u_k|^2 ]
 * targets is W x N. Overlapping windows share input rows, so each u slack
 * row is weighted by the number of (window, step) pairs that read it.
 */
inline ad::Var nstep_loss(const models::RolloutGraph& g, ad::Var targets, std::size_t observed, double lambda,
                          double mu) {
  ad::Tape& tape = *targets.tape;
  const Matrix& t = tape.value(targets);
  const std::size_t horizon = g.horizon();
  const std::size_t windows = g.windows;
  if (t.cols() != horizon) throw DimensionError("nstep_loss: targets have " + std::to_string(t.cols()) + " steps, rollout has " + std::to_string(horizon));
  if (t.rows() != windows) throw DimensionError("nstep_loss: window counts differ");

  const Matrix tt = transpose(t);  // row k holds step k of every window
  std::vector<ad::Var> fit, slack;
  fit.reserve(horizon);
  for (std::size_t k = 0; k < horizon; ++k) {
    const auto want = tt.row(k);
    const ad::Var target = tape.constant(Matrix(windows, 1, std::vector<double>(want.begin(), want.end())));
    fit.push_back(ad::column_sse(g.states[k + 1], target, observed));
    if (g.has_slack() && lambda != 0.0) slack.push_back(ad::sum_of_squares(g.slack_x[k]));
  }
  ad::Var total = ad::sum(ad::concat_rows(fit));
  if (!slack.empty()) total = total + ad::scale(ad::sum(ad::concat_rows(slack)), lambda);
  if (g.has_slack() && mu != 0.0) {
    Matrix weight(tape.value(g.slack_u).rows(), 1);
    for (std::size_t w = 0; w < windows; ++w)
      for (std::size_t k = 0; k < horizon; ++k) weight[k + w * g.stride] += 1.0;
    for (double& v : weight.values()) v = std::sqrt(v);
    total = total + ad::scale(ad::sum_of_squares(ad::hadamard(g.slack_u, tape.constant(std::move(weight)))), mu);
  }
  return ad::scale(total, 1.0 / static_cast<double>(horizon * windows));
}

/**
 * Same objective over already computed rollouts. targets[w] holds the N
 * observed values for rollout w (N x 1 or 1 x N).
 */
inline double nstep_loss(std::span<const models::RolloutResult> rollouts, std::span<const Matrix> targets,
                         std::size_t observed, double lambda, double mu) {
  if (rollouts.size() != targets.size() || rollouts.empty()) throw DimensionError("nstep_loss: rollout/target count mismatch");
  double total = 0.0;
  for (std::size_t w = 0; w < rollouts.size(); ++w) {
    const auto& r = rollouts[w];
    const std::size_t horizon = r.states.rows() - 1;
    if (targets[w].size() != horizon) throw DimensionError("nstep_loss: rollout and target lengths differ");
    double s = 0.0;
    for (std::size_t k = 0; k < horizon; ++k) {
      const double e = r.states(k + 1, observed) - targets[w][k];
      s += e * e;
      for (std::size_t i = 0; i < r.slack_x.cols(); ++i) s += lambda * r.slack_x(k, i) * r.slack_x(k, i);
      s += mu * r.slack_u[k] * r.slack_u[k];
    }
    total += s / static_cast<double>(horizon);
  }
  return total / static_cast<double>(rollouts.size());
}

}  // namespace cnode::training
