#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>

#include <cnode/models/model.hpp>
#include <cnode/numerics/eigen.hpp>
#include <cnode/numerics/rng.hpp>

namespace cnode::models {

struct StabilitySummary {
  std::size_t draws = 0;
  std::size_t violations = 0;  // draws breaking any of the three properties
  double min_entry = std::numeric_limits<double>::infinity();
  double min_row_sum = std::numeric_limits<double>::infinity();
  double max_row_sum = -std::numeric_limits<double>::infinity();
  double max_radius = 0.0;
};

/**
 * Draws raw (A', M') pairs uniformly from [-range, range] and checks that
 * the composed transition is nonnegative, has row sums in [0.9, 1) and
 * spectral radius below 1.
 */
inline StabilitySummary pf_stability_check(std::size_t draws, std::uint64_t seed, std::size_t n = 4,
                                           double range = 10.0) {
  SeededRng rng(seed);
  StabilitySummary s;
  s.draws = draws;
  for (std::size_t i = 0; i < draws; ++i) {
    const Matrix a_raw = rng_uniform(rng, -range, range, n, n);
    const Matrix m_raw = rng_uniform(rng, -range, range, n, n);
    const Matrix a = pf_transition(a_raw, m_raw);
    bool ok = true;
    for (std::size_t r = 0; r < n; ++r) {
      double row = 0.0;
      for (std::size_t c = 0; c < n; ++c) {
        s.min_entry = std::min(s.min_entry, a(r, c));
        ok = ok && a(r, c) >= 0.0;
        row += a(r, c);
      }
      s.min_row_sum = std::min(s.min_row_sum, row);
      s.max_row_sum = std::max(s.max_row_sum, row);
      ok = ok && row >= 0.9 && row < 1.0;
    }
    const double rho = spectral_radius(a);
    s.max_radius = std::max(s.max_radius, rho);
    ok = ok && rho < 1.0;
    if (!ok) ++s.violations;
  }
  return s;
}

}  // namespace cnode::models
