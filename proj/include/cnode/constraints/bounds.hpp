#pragma once

#include <algorithm>
#include <filesystem>
#include <string>
#include <utility>

#include <cnode/autodiff/tape.hpp>
#include <cnode/errors.hpp>
#include <cnode/numerics/csv.hpp>
#include <cnode/numerics/matrix.hpp>
#include <cnode/plant/plant.hpp>

namespace cnode::constraints {

/**
 * @brief Box bounds on states and on the algebraic input, plus penalty weights.
 *
 * State bounds are row-per-step matrices (n x 4). A single row is a constant
 * bound; longer sequences are indexed by step within the rolled-out segment and
 * repeat cyclically when the segment is longer.
 */
struct BoundSpec {
  Matrix x_lower = Matrix(1, plant::kStateDim, 0.0);
  Matrix x_upper = Matrix(1, plant::kStateDim, 40.0);
  double u_lower = 0.0;
  double u_upper = 0.0;
  double lambda = 1.0;  // state-slack weight
  double mu = 1.0;      // input-slack weight

  void validate() const {
    if (x_lower.cols() != plant::kStateDim || x_upper.cols() != plant::kStateDim || x_lower.rows() == 0 ||
        x_upper.rows() == 0) {
      throw DimensionError("BoundSpec: state bounds must have 4 columns");
    }
    if (x_lower.rows() != x_upper.rows()) throw DimensionError("BoundSpec: lower/upper sequences differ in length");
    for (std::size_t k = 0; k < x_lower.size(); ++k) {
      if (x_lower[k] > x_upper[k]) {
        throw ValidationError("BoundSpec: state lower bound exceeds upper at step " +
                              std::to_string(k / plant::kStateDim));
      }
    }
    if (u_lower > u_upper) throw ValidationError("BoundSpec: u lower bound exceeds upper");
    if (!(lambda >= 0.0) || !(mu >= 0.0)) throw ValidationError("BoundSpec: penalty weights must be nonnegative");
  }

  /// Rows [first, first + count) of a bound sequence, repeating cyclically.
  static Matrix rows_of(const Matrix& seq, std::size_t first, std::size_t count) {
    Matrix out(count, seq.cols());
    for (std::size_t k = 0; k < count; ++k) {
      const auto src = seq.row((first + k) % seq.rows());
      std::copy(src.begin(), src.end(), out.row(k).begin());
    }
    return out;
  }

  Matrix lower_rows(std::size_t first, std::size_t count) const { return rows_of(x_lower, first, count); }
  Matrix upper_rows(std::size_t first, std::size_t count) const { return rows_of(x_upper, first, count); }
};

/// States in [0, 40] degC; heat input within the nominal actuator range +-u_max.
inline BoundSpec default_bounds(const plant::PlantSystem& p) {
  BoundSpec b;
  b.u_lower = -p.u_max();
  b.u_upper = p.u_max();
  return b;
}

/// Constant state bounds: the range each state covers in `states`, widened by margin.
inline void set_envelope(BoundSpec& b, const Matrix& states, double margin) {
  if (states.cols() != plant::kStateDim || states.rows() == 0) throw DimensionError("set_envelope: need T x 4 states");
  if (!(margin >= 0.0)) throw ArgumentError("set_envelope: margin must be nonnegative");
  b.x_lower = Matrix(1, plant::kStateDim);
  b.x_upper = Matrix(1, plant::kStateDim);
  for (std::size_t j = 0; j < plant::kStateDim; ++j) {
    double lo = states(0, j), hi = states(0, j);
    for (std::size_t k = 1; k < states.rows(); ++k) {
      lo = std::min(lo, states(k, j));
      hi = std::max(hi, states(k, j));
    }
    b.x_lower(0, j) = lo - margin;
    b.x_upper(0, j) = hi + margin;
  }
}

struct SlackPair {
  Matrix lower;  // relu(lower_bound - v)
  Matrix upper;  // relu(v - upper_bound)

  Matrix joint() const { return lower + upper; }
};

/// Numeric slacks of v against elementwise bounds of the same shape.
inline SlackPair bound_slacks(const Matrix& v, const Matrix& lower, const Matrix& upper) {
  require_same_shape(v, lower, "bound_slacks");
  require_same_shape(v, upper, "bound_slacks");
  SlackPair s{Matrix(v.rows(), v.cols()), Matrix(v.rows(), v.cols())};
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (lower[k] > upper[k]) throw ValidationError("bound_slacks: lower bound exceeds upper bound");
    s.lower[k] = std::max(lower[k] - v[k], 0.0);
    s.upper[k] = std::max(v[k] - upper[k], 0.0);
  }
  return s;
}

struct TapeSlacks {
  ad::Var lower;
  ad::Var upper;
  ad::Var joint;
};

/// Slacks recorded on the tape as separate ReLU units.
inline TapeSlacks bound_slacks(ad::Var v, ad::Var lower, ad::Var upper) {
  const Matrix& lo = v.tape->value(lower);
  const Matrix& hi = v.tape->value(upper);
  require_same_shape(lo, hi, "bound_slacks");
  for (std::size_t k = 0; k < lo.size(); ++k) {
    if (lo[k] > hi[k]) throw ValidationError("bound_slacks: lower bound exceeds upper bound");
  }
  TapeSlacks s;
  s.lower = ad::relu(lower - v);
  s.upper = ad::relu(v - upper);
  s.joint = s.lower + s.upper;
  return s;
}

/// Per-step state bounds: header x1_lo..x4_lo,x1_hi..x4_hi.
inline std::pair<Matrix, Matrix> load_state_bounds_csv(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  const auto rows = plant::detail::read_table(
      in, {"x1_lo", "x2_lo", "x3_lo", "x4_lo", "x1_hi", "x2_hi", "x3_hi", "x4_hi"}, path.string());
  if (rows.empty()) throw ValidationError(path.string() + ": no bound rows");
  Matrix lo(rows.size(), plant::kStateDim), hi(rows.size(), plant::kStateDim);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (std::size_t i = 0; i < plant::kStateDim; ++i) {
      lo(k, i) = rows[k][i];
      hi(k, i) = rows[k][plant::kStateDim + i];
      if (lo(k, i) > hi(k, i)) {
        throw ValidationError(path.string() + ": lower bound exceeds upper at line " + std::to_string(k + 2));
      }
    }
  }
  return {std::move(lo), std::move(hi)};
}

}  // namespace cnode::constraints
