#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <cnode/errors.hpp>
#include <cnode/models/model.hpp>

namespace cnode::training {

struct AdamWSettings {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

using NamedGradients = std::vector<std::pair<std::string, Matrix>>;

/// First/second moments per parameter name and the shared step counter.
struct OptimizerState {
  std::vector<std::pair<std::string, std::pair<Matrix, Matrix>>> moments;
  std::size_t step = 0;

  std::pair<Matrix, Matrix>& slot(const std::string& name, const Matrix& like) {
    for (auto& [n, mv] : moments)
      if (n == name) return mv;
    moments.emplace_back(name, std::make_pair(Matrix(like.rows(), like.cols()), Matrix(like.rows(), like.cols())));
    return moments.back().second;
  }
};

/**
 * One AdamW update with decoupled weight decay:
 *   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
 *   theta <- theta - lr (m_hat / (sqrt(v_hat) + eps) + wd theta)
 * Parameters without a gradient entry are left untouched.
 */
inline void adamw_step(models::ParamSet& params, const NamedGradients& grads, OptimizerState& state, double lr,
                       double weight_decay, const AdamWSettings& cfg = {}) {
  for (const auto& [name, g] : grads) {
    if (!all_finite(g)) throw NumericError("adamw: non-finite gradient for '" + name + "'");
    if (!params.at(name).same_shape(g)) throw DimensionError("adamw: gradient shape differs for '" + name + "'");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (const auto& [name, g] : grads) {
    Matrix& theta = params.at(name);
    auto& [m, v] = state.slot(name, theta);
    for (std::size_t k = 0; k < theta.size(); ++k) {
      m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g[k];
      v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g[k] * g[k];
      const double m_hat = m[k] / c1;
      const double v_hat = v[k] / c2;
      theta[k] -= lr * (m_hat / (std::sqrt(v_hat) + cfg.eps) + weight_decay * theta[k]);
    }
  }
}

}  // namespace cnode::training
