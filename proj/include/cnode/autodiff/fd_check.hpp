#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include <cnode/autodiff/tape.hpp>
#include <cnode/errors.hpp>

namespace cnode::ad {

/// Builds a scalar on a fresh tape from one trainable leaf per input matrix.
using TapeFunction = std::function<Var(Tape&, std::span<const Var>)>;

/// Returns true for (leaf index, entry index) pairs that must not be checked.
using FdExclusion = std::function<bool(std::size_t, std::size_t)>;

inline double evaluate_scalar(const TapeFunction& f, std::span<const Matrix> leaves) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(leaves.size());
  for (const Matrix& m : leaves) vars.push_back(tape.leaf(m));
  return tape.value(f(tape, vars)).item();
}

/// Reverse-mode gradients of f at the given leaf values.
inline std::vector<Matrix> tape_gradients(const TapeFunction& f, std::span<const Matrix> leaves) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(leaves.size());
  for (const Matrix& m : leaves) vars.push_back(tape.leaf(m));
  const Var out = f(tape, vars);
  tape.backward(out);
  std::vector<Matrix> grads;
  grads.reserve(vars.size());
  for (Var v : vars) grads.push_back(tape.grad(v));
  return grads;
}

/**
 * @brief Compares tape gradients with central differences.
 *
 * Returns max over entries of |g_ad - g_fd| / (1e-8 + |g_ad| + |g_fd|).
 * Throws NumericError if f is non-finite at a perturbed point.
 */
inline double finite_difference_check(const TapeFunction& f, std::span<const Matrix> leaves,
                                      double eps, const FdExclusion& exclude = {}) {
  if (!(eps > 0.0)) throw ArgumentError("finite_difference_check: eps must be positive");
  const auto grads = tape_gradients(f, leaves);
  std::vector<Matrix> work(leaves.begin(), leaves.end());
  double worst = 0.0;
  for (std::size_t l = 0; l < work.size(); ++l) {
    for (std::size_t k = 0; k < work[l].size(); ++k) {
      if (exclude && exclude(l, k)) continue;
      const double orig = work[l][k];
      work[l][k] = orig + eps;
      const double fp = evaluate_scalar(f, work);
      work[l][k] = orig - eps;
      const double fm = evaluate_scalar(f, work);
      work[l][k] = orig;
      if (!std::isfinite(fp) || !std::isfinite(fm)) {
        throw NumericError("finite_difference_check: non-finite value at perturbed point");
      }
      const double fd = (fp - fm) / (2.0 * eps);
      const double ad = grads[l][k];
      worst = std::max(worst, std::abs(ad - fd) / (1e-8 + std::abs(ad) + std::abs(fd)));
    }
  }
  return worst;
}

}  // namespace cnode::ad
