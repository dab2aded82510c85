#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <cnode/autodiff/fd_check.hpp>
#include <cnode/autodiff/tape.hpp>
#include <cnode/numerics/rng.hpp>

namespace cnode::ad {

/// One randomly drawn instance of an operation, reduced to a scalar.
struct OpCase {
  OpKind kind = OpKind::leaf;
  std::vector<Matrix> leaves;
  TapeFunction f;
};

namespace detail {

inline std::size_t dim(SeededRng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.uniform01() * static_cast<double>(hi - lo + 1)) % (hi - lo + 1);
}

inline Matrix random_matrix(SeededRng& rng, std::size_t r, std::size_t c, double lo = -1.0, double hi = 1.0) {
  return rng_uniform(rng, lo, hi, r, c);
}

// Entries in +-[margin, 1]: keeps piecewise-linear ops away from their kinks.
inline Matrix away_from_zero(SeededRng& rng, std::size_t r, std::size_t c, double margin = 0.1) {
  Matrix m(r, c);
  for (double& v : m.values()) v = (rng.uniform01() < 0.5 ? -1.0 : 1.0) * rng.uniform(margin, 1.0);
  return m;
}

// sum(out .* W) for a fixed random W, so every output entry carries its own weight.
inline Var contract(Tape& t, Var out, const Matrix& weights) { return sum(hadamard(out, t.constant(weights))); }

}  // namespace detail

/**
 * Draws a random case of `kind`. Leaves are the trainable inputs; any
 * constant operands (bounds, targets, weights) are captured by f.
 */
inline OpCase make_op_case(OpKind kind, SeededRng& rng) {
  using detail::dim;
  using detail::random_matrix;
  const std::size_t r = dim(rng, 1, 4), c = dim(rng, 1, 4), k = dim(rng, 1, 4);
  OpCase oc;
  oc.kind = kind;
  auto unary = [&](Matrix x, std::function<Var(Var)> op) {
    Matrix w = random_matrix(rng, x.rows(), x.cols());
    oc.leaves = {std::move(x)};
    oc.f = [op, w](Tape& t, std::span<const Var> v) { return detail::contract(t, op(v[0]), w); };
  };
  auto binary = [&](std::function<Var(Var, Var)> op) {
    oc.leaves = {random_matrix(rng, r, c), random_matrix(rng, r, c)};
    Matrix w = random_matrix(rng, r, c);
    oc.f = [op, w](Tape& t, std::span<const Var> v) { return detail::contract(t, op(v[0], v[1]), w); };
  };

  switch (kind) {
    case OpKind::leaf: {
      oc.leaves = {random_matrix(rng, r, c)};
      Matrix w = random_matrix(rng, r, c);
      oc.f = [w](Tape& t, std::span<const Var> v) { return detail::contract(t, v[0], w); };
      break;
    }
    case OpKind::matmul: {
      oc.leaves = {random_matrix(rng, r, k), random_matrix(rng, k, c)};
      Matrix w = random_matrix(rng, r, c);
      oc.f = [w](Tape& t, std::span<const Var> v) { return detail::contract(t, matmul(v[0], v[1]), w); };
      break;
    }
    case OpKind::add: binary([](Var a, Var b) { return a + b; }); break;
    case OpKind::subtract: binary([](Var a, Var b) { return a - b; }); break;
    case OpKind::hadamard: binary([](Var a, Var b) { return hadamard(a, b); }); break;
    case OpKind::scale: {
      const double s = rng.uniform(-3.0, 3.0);
      unary(random_matrix(rng, r, c), [s](Var a) { return scale(a, s); });
      break;
    }
    case OpKind::relu: unary(detail::away_from_zero(rng, r, c), [](Var a) { return relu(a); }); break;
    case OpKind::sigmoid: unary(random_matrix(rng, r, c, -3.0, 3.0), [](Var a) { return sigmoid(a); }); break;
    case OpKind::exp: unary(random_matrix(rng, r, c, -2.0, 2.0), [](Var a) { return exp(a); }); break;
    case OpKind::row_softmax: unary(random_matrix(rng, r, c, -3.0, 3.0), [](Var a) { return row_softmax(a); }); break;
    case OpKind::sum_of_squares:
      oc.leaves = {random_matrix(rng, r, c)};
      oc.f = [](Tape&, std::span<const Var> v) { return sum_of_squares(v[0]); };
      break;
    case OpKind::sum:
      oc.leaves = {random_matrix(rng, r, c)};
      oc.f = [](Tape&, std::span<const Var> v) { return scale(sum(v[0]), 1.5); };
      break;
    case OpKind::concat_rows: {
      oc.leaves = {random_matrix(rng, r, c), random_matrix(rng, k, c)};
      Matrix w = random_matrix(rng, r + k, c);
      oc.f = [w](Tape& t, std::span<const Var> v) { return detail::contract(t, concat_rows({v[0], v[1]}), w); };
      break;
    }
    case OpKind::concat_cols: {
      oc.leaves = {random_matrix(rng, r, c), random_matrix(rng, r, k)};
      Matrix w = random_matrix(rng, r, c + k);
      oc.f = [w](Tape& t, std::span<const Var> v) { return detail::contract(t, concat_cols({v[0], v[1]}), w); };
      break;
    }
    case OpKind::slice: {
      const std::size_t rows = r + 3, cols = c + 1, step = dim(rng, 1, 2);
      const std::size_t r0 = dim(rng, 0, 1), c0 = dim(rng, 0, 1);
      const std::size_t r1 = rows, c1 = cols;
      oc.leaves = {random_matrix(rng, rows, cols)};
      const std::size_t out_rows = (r1 - r0 + step - 1) / step;
      Matrix w = random_matrix(rng, out_rows, c1 - c0);
      oc.f = [=](Tape& t, std::span<const Var> v) {
        return detail::contract(t, t.record(OpKind::slice, {v[0]}, OpAttrs{.r0 = r0, .r1 = r1, .c0 = c0, .c1 = c1, .row_step = step}), w);
      };
      break;
    }
    case OpKind::transpose: {
      oc.leaves = {random_matrix(rng, r, c)};
      Matrix w = random_matrix(rng, c, r);
      oc.f = [w](Tape& t, std::span<const Var> v) { return detail::contract(t, transpose(v[0]), w); };
      break;
    }
    case OpKind::add_row: {
      oc.leaves = {random_matrix(rng, r, c), random_matrix(rng, 1, c)};
      Matrix w = random_matrix(rng, r, c);
      oc.f = [w](Tape& t, std::span<const Var> v) { return detail::contract(t, add_row(v[0], v[1]), w); };
      break;
    }
    case OpKind::bound_slack: {
      // Values sit at least 0.1 from either bound.
      const bool broadcast = rng.uniform01() < 0.5;
      Matrix lo(broadcast ? 1 : r, c, -0.5), hi(broadcast ? 1 : r, c, 0.5);
      Matrix x(r, c);
      for (double& v : x.values()) {
        const double u = rng.uniform01();
        v = u < 1.0 / 3 ? rng.uniform(-1.5, -0.6) : u < 2.0 / 3 ? rng.uniform(-0.4, 0.4) : rng.uniform(0.6, 1.5);
      }
      oc.leaves = {std::move(x)};
      Matrix w = random_matrix(rng, r, c);
      oc.f = [w, lo, hi](Tape& t, std::span<const Var> v) {
        return detail::contract(t, bound_slack(v[0], t.constant(lo), t.constant(hi)), w);
      };
      break;
    }
    case OpKind::affine_rows: {
      const std::size_t step = dim(rng, 1, 3), r0 = dim(rng, 0, 2);
      const std::size_t c_rows = r0 + (r - 1) * step + 1 + dim(rng, 0, 2);
      oc.leaves = {random_matrix(rng, r, k), random_matrix(rng, k, c), random_matrix(rng, c_rows, c)};
      Matrix w = random_matrix(rng, r, c);
      oc.f = [=](Tape& t, std::span<const Var> v) { return detail::contract(t, affine_rows(v[0], v[1], v[2], r0, step), w); };
      break;
    }
    case OpKind::column_sse: {
      const std::size_t col = dim(rng, 0, c - 1);
      oc.leaves = {random_matrix(rng, r, c)};
      Matrix target = random_matrix(rng, r, 1);
      oc.f = [=](Tape& t, std::span<const Var> v) { return column_sse(v[0], t.constant(target), col); };
      break;
    }
  }
  return oc;
}

/// Every operation kind except leaf.
inline std::vector<OpKind> all_op_kinds() {
  return {OpKind::matmul,      OpKind::add,        OpKind::subtract,   OpKind::scale,         OpKind::hadamard,
          OpKind::relu,        OpKind::sigmoid,    OpKind::exp,        OpKind::row_softmax,   OpKind::sum_of_squares,
          OpKind::sum,         OpKind::concat_rows, OpKind::concat_cols, OpKind::slice,       OpKind::transpose,
          OpKind::add_row,     OpKind::bound_slack, OpKind::affine_rows, OpKind::column_sse};
}

struct OpCheckSummary {
  OpKind kind;
  std::size_t cases = 0;
  double worst = 0.0;  // largest relative error seen
};

/// Finite-difference check of `cases` random instances of every op kind.
inline std::vector<OpCheckSummary> check_all_ops(std::size_t cases, std::uint64_t seed, double eps = 1e-6) {
  std::vector<OpCheckSummary> out;
  SeededRng root(seed);
  for (OpKind kind : all_op_kinds()) {
    SeededRng rng = root.split(static_cast<std::uint64_t>(kind));
    OpCheckSummary s{kind, cases, 0.0};
    for (std::size_t i = 0; i < cases; ++i) {
      const OpCase oc = make_op_case(kind, rng);
      s.worst = std::max(s.worst, finite_difference_check(oc.f, oc.leaves, eps));
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace cnode::ad
