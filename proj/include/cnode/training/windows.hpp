#pragma once

#include <cstddef>
#include <vector>

#include <cnode/errors.hpp>
#include <cnode/numerics/matrix.hpp>
#include <cnode/plant/plant.hpp>

namespace cnode::training {

/**
 * Overlapping N-step windows over one partition, stored batch-major.
 * Window w starts at step starts[w]: its initial state is the full true state
 * there, it consumes signals [start, start + N) and is scored on the observed
 * state at steps start + 1 .. start + N.
 */
struct WindowSet {
  std::size_t horizon = 0;
  std::size_t stride = 1;
  std::vector<std::size_t> starts;
  Matrix x0;       // W x n
  Matrix targets;  // W x N, observed state k + 1 steps after the start

  std::size_t count() const noexcept { return starts.size(); }
};

inline WindowSet make_windows(const plant::Partition& p, std::size_t horizon,
                              std::size_t observed = plant::kObservedState, std::size_t stride = 1) {
  const std::size_t steps = p.steps();
  if (horizon == 0 || horizon > steps) {
    throw ArgumentError("make_windows: horizon " + std::to_string(horizon) + " does not fit a partition of " +
                        std::to_string(steps) + " steps");
  }
  if (stride == 0) throw ArgumentError("make_windows: stride must be positive");
  if (observed >= p.states.cols()) throw ArgumentError("make_windows: observed index out of range");
  WindowSet w;
  w.horizon = horizon;
  w.stride = stride;
  for (std::size_t s = 0; s + horizon <= steps; s += stride) w.starts.push_back(s);
  const std::size_t n = p.states.cols();
  w.x0 = Matrix(w.count(), n);
  w.targets = Matrix(w.count(), horizon);
  for (std::size_t i = 0; i < w.count(); ++i) {
    const std::size_t s = w.starts[i];
    for (std::size_t j = 0; j < n; ++j) w.x0(i, j) = p.states(s, j);
    for (std::size_t k = 0; k < horizon; ++k) w.targets(i, k) = p.states(s + k + 1, observed);
  }
  return w;
}

}  // namespace cnode::training
