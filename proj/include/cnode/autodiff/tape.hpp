#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include <cnode/errors.hpp>
#include <cnode/numerics/matrix.hpp>

namespace cnode::ad {

enum class OpKind {
  leaf,
  matmul,
  add,
  subtract,
  scale,
  hadamard,
  relu,
  sigmoid,
  exp,
  row_softmax,
  sum_of_squares,
  sum,
  concat_rows,
  concat_cols,
  slice,
  transpose,
  add_row,      // M x n plus a 1 x n row broadcast over rows
  bound_slack,  // relu(lo - v) + relu(v - hi); lo/hi constant, same shape or one row
  affine_rows,  // a * b + rows r0, r0 + step, ... of c; one recurrence step
  column_sse,   // sum_i (v(i, c0) - t(i))^2 with t a constant column
};

inline const char* to_string(OpKind k) {
  switch (k) {
    case OpKind::leaf: return "leaf";
    case OpKind::matmul: return "matmul";
    case OpKind::add: return "add";
    case OpKind::subtract: return "subtract";
    case OpKind::scale: return "scale";
    case OpKind::hadamard: return "hadamard";
    case OpKind::relu: return "relu";
    case OpKind::sigmoid: return "sigmoid";
    case OpKind::exp: return "exp";
    case OpKind::row_softmax: return "row_softmax";
    case OpKind::sum_of_squares: return "sum_of_squares";
    case OpKind::sum: return "sum";
    case OpKind::concat_rows: return "concat_rows";
    case OpKind::concat_cols: return "concat_cols";
    case OpKind::slice: return "slice";
    case OpKind::transpose: return "transpose";
    case OpKind::add_row: return "add_row";
    case OpKind::bound_slack: return "bound_slack";
    case OpKind::affine_rows: return "affine_rows";
    case OpKind::column_sse: return "column_sse";
  }
  return "?";
}

/// Per-op static attributes: scale factor or slice ranges.
struct OpAttrs {
  double factor = 1.0;
  std::size_t r0 = 0, r1 = 0, c0 = 0, c1 = 0;
  std::size_t row_step = 1;  // slice takes rows r0, r0 + row_step, ... below r1
};

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;
};

/**
 * @brief Define-by-run reverse-mode gradient tape over dense matrices.
 *
 * Nodes are appended in evaluation order, so the node list is always
 * topologically sorted. Only nodes that depend on a trainable leaf carry an
 * adjoint; constant subgraphs cost a forward evaluation and nothing else.
 */
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void reserve(std::size_t n) { nodes_.reserve(n); }
  std::size_t size() const noexcept { return nodes_.size(); }

  Var leaf(Matrix value, bool trainable = true) {
    Node n;
    n.kind = OpKind::leaf;
    n.value = std::move(value);
    n.trainable = trainable;
    n.needs_grad = trainable;
    nodes_.push_back(std::move(n));
    return {this, nodes_.size() - 1};
  }

  Var constant(Matrix value) { return leaf(std::move(value), false); }

  const Matrix& value(Var v) const { return node(v).value; }
  bool trainable(Var v) const { return node(v).trainable; }
  bool needs_grad(Var v) const { return node(v).needs_grad; }

  /// Adjoint of a trainable leaf after backward().
  const Matrix& grad(Var v) const {
    const Node& n = node(v);
    if (!n.trainable) throw ArgumentError("grad: node is not a trainable leaf");
    if (!backward_done_) throw ArgumentError("grad: backward() has not run");
    return n.adjoint;
  }

  /// Records one operation and computes its primal value.
  Var record(OpKind kind, std::initializer_list<Var> inputs, OpAttrs attrs = {}) {
    Node n;
    n.kind = kind;
    n.attrs = attrs;
    n.inputs.reserve(inputs.size());
    for (Var v : inputs) {
      if (v.tape != this) throw ArgumentError(std::string(to_string(kind)) + ": operand from another tape");
      n.inputs.push_back(v.id);
      n.needs_grad = n.needs_grad || nodes_[v.id].needs_grad;
    }
    if (kind == OpKind::column_sse && nodes_[n.inputs[1]].needs_grad) {
      throw ArgumentError("column_sse: target must be constant");
    }
    if (kind == OpKind::bound_slack) {
      if (nodes_[n.inputs[1]].needs_grad || nodes_[n.inputs[2]].needs_grad) {
        throw ArgumentError("bound_slack: bounds must be constant");
      }
      n.needs_grad = nodes_[n.inputs[0]].needs_grad;
    }
    n.value = forward(n);
    nodes_.push_back(std::move(n));
    backward_done_ = false;
    return {this, nodes_.size() - 1};
  }

  /// Concatenation of any number of operands.
  Var record_concat(OpKind kind, const std::vector<Var>& inputs) {
    if (inputs.empty()) throw DimensionError(std::string(to_string(kind)) + ": no operands");
    Node n;
    n.kind = kind;
    for (Var v : inputs) {
      if (v.tape != this) throw ArgumentError(std::string(to_string(kind)) + ": operand from another tape");
      n.inputs.push_back(v.id);
      n.needs_grad = n.needs_grad || nodes_[v.id].needs_grad;
    }
    n.value = forward(n);
    nodes_.push_back(std::move(n));
    backward_done_ = false;
    return {this, nodes_.size() - 1};
  }

  /**
   * @brief Reverse sweep from a scalar node.
   *
   * Adjoints are reset first, so calling backward twice on the same tape gives
   * the same result. Leaves used several times accumulate every use.
   */
  void backward(Var loss) {
    const Node& ln = node(loss);
    if (ln.value.rows() != 1 || ln.value.cols() != 1) {
      throw ArgumentError("backward: loss must be 1x1, got " + ln.value.shape_string());
    }
    for (Node& n : nodes_) {
      if (n.needs_grad) {
        if (n.adjoint.same_shape(n.value)) n.adjoint.fill(0.0);
        else n.adjoint = Matrix(n.value.rows(), n.value.cols());
      }
    }
    backward_done_ = true;
    if (!ln.needs_grad) return;
    nodes_[loss.id].adjoint[0] = 1.0;
    for (std::size_t i = loss.id + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.needs_grad || n.kind == OpKind::leaf) continue;
      propagate(n);
    }
  }

  /// Trainable leaves and their gradients, in creation order.
  std::vector<std::pair<Var, Matrix>> gradients() {
    std::vector<std::pair<Var, Matrix>> out;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (nodes_[i].kind == OpKind::leaf && nodes_[i].trainable) {
        out.emplace_back(Var{this, i}, backward_done_ ? nodes_[i].adjoint : Matrix());
      }
    }
    return out;
  }

 private:
  struct Node {
    OpKind kind = OpKind::leaf;
    std::vector<std::size_t> inputs;
    Matrix value;
    Matrix adjoint;
    bool needs_grad = false;
    bool trainable = false;
    OpAttrs attrs;
  };

  const Node& node(Var v) const {
    if (v.tape != this || v.id >= nodes_.size()) throw ArgumentError("tape: invalid node handle");
    return nodes_[v.id];
  }

  const Matrix& in(const Node& n, std::size_t k) const { return nodes_[n.inputs[k]].value; }

  [[noreturn]] static void shape_error(const Node& n, const std::string& detail) {
    throw DimensionError(std::string(to_string(n.kind)) + ": " + detail);
  }

  void expect_arity(const Node& n, std::size_t k) const {
    if (n.inputs.size() != k) shape_error(n, "expects " + std::to_string(k) + " operands");
  }

  void expect_same(const Node& n, const Matrix& a, const Matrix& b) const {
    if (!a.same_shape(b)) shape_error(n, "shape mismatch " + a.shape_string() + " vs " + b.shape_string());
  }

  // Bounds either match v or are a single row broadcast down v.
  void expect_bounds(const Node& n, const Matrix& v, const Matrix& b) const {
    if (b.same_shape(v) || (b.rows() == 1 && b.cols() == v.cols())) return;
    shape_error(n, "bounds " + b.shape_string() + " do not fit " + v.shape_string());
  }

  Matrix forward(const Node& n) const {
    switch (n.kind) {
      case OpKind::leaf: break;
      case OpKind::matmul: {
        expect_arity(n, 2);
        const Matrix &a = in(n, 0), &b = in(n, 1);
        if (a.cols() != b.rows()) shape_error(n, "inner dimensions differ " + a.shape_string() + " * " + b.shape_string());
        Matrix out(a.rows(), b.cols());
        matmul_accumulate(a, b, out);
        return out;
      }
      case OpKind::add:
      case OpKind::subtract:
      case OpKind::hadamard: {
        expect_arity(n, 2);
        const Matrix &a = in(n, 0), &b = in(n, 1);
        expect_same(n, a, b);
        Matrix out(a.rows(), a.cols());
        for (std::size_t k = 0; k < a.size(); ++k) {
          out[k] = n.kind == OpKind::add ? a[k] + b[k] : n.kind == OpKind::subtract ? a[k] - b[k] : a[k] * b[k];
        }
        return out;
      }
      case OpKind::scale: {
        expect_arity(n, 1);
        return n.attrs.factor * in(n, 0);
      }
      case OpKind::relu:
        expect_arity(n, 1);
        return map(in(n, 0), [](double x) { return x > 0.0 ? x : 0.0; });
      case OpKind::sigmoid:
        expect_arity(n, 1);
        return map(in(n, 0), [](double x) {
          if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
          const double e = std::exp(x);
          return e / (1.0 + e);
        });
      case OpKind::exp:
        expect_arity(n, 1);
        return map(in(n, 0), [](double x) { return std::exp(x); });
      case OpKind::row_softmax: {
        expect_arity(n, 1);
        const Matrix& a = in(n, 0);
        Matrix out(a.rows(), a.cols());
        for (std::size_t i = 0; i < a.rows(); ++i) {
          auto src = a.row(i);
          auto dst = out.row(i);
          const double mx = *std::max_element(src.begin(), src.end());
          double s = 0.0;
          for (std::size_t j = 0; j < src.size(); ++j) s += (dst[j] = std::exp(src[j] - mx));
          for (double& v : dst) v /= s;
        }
        return out;
      }
      case OpKind::sum_of_squares: {
        expect_arity(n, 1);
        double s = 0.0;
        for (double v : in(n, 0).values()) s += v * v;
        return Matrix::scalar(s);
      }
      case OpKind::sum: {
        expect_arity(n, 1);
        double s = 0.0;
        for (double v : in(n, 0).values()) s += v;
        return Matrix::scalar(s);
      }
      case OpKind::concat_rows: {
        const std::size_t cols = in(n, 0).cols();
        std::size_t rows = 0;
        for (std::size_t k = 0; k < n.inputs.size(); ++k) {
          if (in(n, k).cols() != cols) shape_error(n, "column counts differ");
          rows += in(n, k).rows();
        }
        Matrix out(rows, cols);
        std::size_t r = 0;
        for (std::size_t k = 0; k < n.inputs.size(); ++k) {
          const Matrix& a = in(n, k);
          std::copy(a.values().begin(), a.values().end(), out.values().begin() + static_cast<std::ptrdiff_t>(r * cols));
          r += a.rows();
        }
        return out;
      }
      case OpKind::concat_cols: {
        const std::size_t rows = in(n, 0).rows();
        std::size_t cols = 0;
        for (std::size_t k = 0; k < n.inputs.size(); ++k) {
          if (in(n, k).rows() != rows) shape_error(n, "row counts differ");
          cols += in(n, k).cols();
        }
        Matrix out(rows, cols);
        std::size_t c = 0;
        for (std::size_t k = 0; k < n.inputs.size(); ++k) {
          const Matrix& a = in(n, k);
          for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < a.cols(); ++j) out(i, c + j) = a(i, j);
          c += a.cols();
        }
        return out;
      }
      case OpKind::slice: {
        expect_arity(n, 1);
        const Matrix& a = in(n, 0);
        const auto& at = n.attrs;
        if (at.r0 > at.r1 || at.r1 > a.rows() || at.c0 > at.c1 || at.c1 > a.cols() || at.row_step == 0) {
          shape_error(n, "range out of bounds for " + a.shape_string());
        }
        if (at.row_step == 1) return block(a, at.r0, at.r1, at.c0, at.c1);
        Matrix out((at.r1 - at.r0 + at.row_step - 1) / at.row_step, at.c1 - at.c0);
        for (std::size_t i = 0; i < out.rows(); ++i)
          for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) = a(at.r0 + i * at.row_step, at.c0 + j);
        return out;
      }
      case OpKind::transpose:
        expect_arity(n, 1);
        return cnode::transpose(in(n, 0));
      case OpKind::add_row: {
        expect_arity(n, 2);
        const Matrix &a = in(n, 0), &b = in(n, 1);
        if (b.rows() != 1 || b.cols() != a.cols()) shape_error(n, "bias must be 1x" + std::to_string(a.cols()));
        Matrix out = a;
        for (std::size_t i = 0; i < a.rows(); ++i)
          for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) += b[j];
        return out;
      }
      case OpKind::affine_rows: {
        expect_arity(n, 3);
        const Matrix &a = in(n, 0), &b = in(n, 1), &c = in(n, 2);
        const auto& at = n.attrs;
        if (a.cols() != b.rows()) shape_error(n, "inner dimensions differ " + a.shape_string() + " * " + b.shape_string());
        if (c.cols() != b.cols() || at.row_step == 0 || a.rows() == 0 ||
            at.r0 + (a.rows() - 1) * at.row_step >= c.rows()) {
          shape_error(n, "offset rows out of range for " + c.shape_string());
        }
        Matrix out(a.rows(), b.cols());
        for (std::size_t i = 0; i < out.rows(); ++i) {
          const auto src = c.row(at.r0 + i * at.row_step);
          std::copy(src.begin(), src.end(), out.row(i).begin());
        }
        matmul_accumulate(a, b, out);
        return out;
      }
      case OpKind::column_sse: {
        expect_arity(n, 2);
        const Matrix &v = in(n, 0), &t = in(n, 1);
        if (n.attrs.c0 >= v.cols() || t.cols() != 1 || t.rows() != v.rows()) {
          shape_error(n, "needs a " + std::to_string(v.rows()) + "x1 target and a column of " + v.shape_string());
        }
        double s = 0.0;
        for (std::size_t i = 0; i < v.rows(); ++i) {
          const double e = v(i, n.attrs.c0) - t[i];
          s += e * e;
        }
        return Matrix::scalar(s);
      }
      case OpKind::bound_slack: {
        expect_arity(n, 3);
        const Matrix &v = in(n, 0), &lo = in(n, 1), &hi = in(n, 2);
        expect_bounds(n, v, lo);
        expect_bounds(n, v, hi);
        Matrix out(v.rows(), v.cols());
        const std::size_t lo_step = lo.rows() == 1 ? 0 : 1, hi_step = hi.rows() == 1 ? 0 : 1;
        for (std::size_t i = 0; i < v.rows(); ++i) {
          const auto vr = v.row(i), lr = lo.row(i * lo_step), hr = hi.row(i * hi_step);
          auto dst = out.row(i);
          for (std::size_t j = 0; j < vr.size(); ++j) {
            if (lr[j] > hr[j]) throw ValidationError("bound_slack: lower bound exceeds upper bound");
            dst[j] = std::max(lr[j] - vr[j], 0.0) + std::max(vr[j] - hr[j], 0.0);
          }
        }
        return out;
      }
    }
    shape_error(n, "unsupported operation");
  }

  Matrix& adj_of(const Node& n, std::size_t k) { return nodes_[n.inputs[k]].adjoint; }
  bool wants(const Node& n, std::size_t k) const { return nodes_[n.inputs[k]].needs_grad; }

  void propagate(const Node& n) {
    const Matrix& g = n.adjoint;
    const Matrix& y = n.value;
    switch (n.kind) {
      case OpKind::leaf: break;
      case OpKind::affine_rows:
        if (wants(n, 2)) {
          Matrix& dc = adj_of(n, 2);
          for (std::size_t i = 0; i < g.rows(); ++i) {
            auto dst = dc.row(n.attrs.r0 + i * n.attrs.row_step);
            const auto src = g.row(i);
            for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
          }
        }
        [[fallthrough]];
      case OpKind::matmul: {
        const Matrix &a = in(n, 0), &b = in(n, 1);
        if (wants(n, 0)) matmul_nt_accumulate(g, b, adj_of(n, 0));  // adjA += g * b'
        if (wants(n, 1)) matmul_tn_accumulate(a, g, adj_of(n, 1));  // adjB += a' * g
        break;
      }
      case OpKind::add:
      case OpKind::subtract: {
        if (wants(n, 0)) {
          Matrix& d = adj_of(n, 0);
          for (std::size_t k = 0; k < g.size(); ++k) d[k] += g[k];
        }
        if (wants(n, 1)) {
          Matrix& d = adj_of(n, 1);
          const double s = n.kind == OpKind::add ? 1.0 : -1.0;
          for (std::size_t k = 0; k < g.size(); ++k) d[k] += s * g[k];
        }
        break;
      }
      case OpKind::scale: {
        Matrix& d = adj_of(n, 0);
        for (std::size_t k = 0; k < g.size(); ++k) d[k] += n.attrs.factor * g[k];
        break;
      }
      case OpKind::hadamard: {
        const Matrix &a = in(n, 0), &b = in(n, 1);
        if (wants(n, 0)) {
          Matrix& d = adj_of(n, 0);
          for (std::size_t k = 0; k < g.size(); ++k) d[k] += g[k] * b[k];
        }
        if (wants(n, 1)) {
          Matrix& d = adj_of(n, 1);
          for (std::size_t k = 0; k < g.size(); ++k) d[k] += g[k] * a[k];
        }
        break;
      }
      case OpKind::relu: {
        Matrix& d = adj_of(n, 0);
        for (std::size_t k = 0; k < g.size(); ++k)
          if (y[k] > 0.0) d[k] += g[k];
        break;
      }
      case OpKind::sigmoid: {
        Matrix& d = adj_of(n, 0);
        for (std::size_t k = 0; k < g.size(); ++k) d[k] += g[k] * y[k] * (1.0 - y[k]);
        break;
      }
      case OpKind::exp: {
        Matrix& d = adj_of(n, 0);
        for (std::size_t k = 0; k < g.size(); ++k) d[k] += g[k] * y[k];
        break;
      }
      case OpKind::row_softmax: {
        Matrix& d = adj_of(n, 0);
        for (std::size_t i = 0; i < y.rows(); ++i) {
          double dot = 0.0;
          for (std::size_t j = 0; j < y.cols(); ++j) dot += g(i, j) * y(i, j);
          for (std::size_t j = 0; j < y.cols(); ++j) d(i, j) += y(i, j) * (g(i, j) - dot);
        }
        break;
      }
      case OpKind::sum_of_squares: {
        const Matrix& a = in(n, 0);
        Matrix& d = adj_of(n, 0);
        const double s = 2.0 * g[0];
        for (std::size_t k = 0; k < a.size(); ++k) d[k] += s * a[k];
        break;
      }
      case OpKind::sum: {
        Matrix& d = adj_of(n, 0);
        for (double& v : d.values()) v += g[0];
        break;
      }
      case OpKind::concat_rows: {
        std::size_t offset = 0;
        for (std::size_t k = 0; k < n.inputs.size(); ++k) {
          const std::size_t len = in(n, k).size();
          if (wants(n, k)) {
            Matrix& d = adj_of(n, k);
            for (std::size_t q = 0; q < len; ++q) d[q] += g[offset + q];
          }
          offset += len;
        }
        break;
      }
      case OpKind::concat_cols: {
        std::size_t c = 0;
        for (std::size_t k = 0; k < n.inputs.size(); ++k) {
          const std::size_t w = in(n, k).cols();
          if (wants(n, k)) {
            Matrix& d = adj_of(n, k);
            for (std::size_t i = 0; i < g.rows(); ++i)
              for (std::size_t j = 0; j < w; ++j) d(i, j) += g(i, c + j);
          }
          c += w;
        }
        break;
      }
      case OpKind::slice: {
        Matrix& d = adj_of(n, 0);
        const auto& at = n.attrs;
        for (std::size_t i = 0; i < g.rows(); ++i)
          for (std::size_t j = 0; j < g.cols(); ++j) d(at.r0 + i * at.row_step, at.c0 + j) += g(i, j);
        break;
      }
      case OpKind::transpose: {
        Matrix& d = adj_of(n, 0);
        for (std::size_t i = 0; i < g.rows(); ++i)
          for (std::size_t j = 0; j < g.cols(); ++j) d(j, i) += g(i, j);
        break;
      }
      case OpKind::add_row: {
        if (wants(n, 0)) {
          Matrix& d = adj_of(n, 0);
          for (std::size_t k = 0; k < g.size(); ++k) d[k] += g[k];
        }
        if (wants(n, 1)) {
          Matrix& d = adj_of(n, 1);
          for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = 0; j < g.cols(); ++j) d[j] += g(i, j);
        }
        break;
      }
      case OpKind::column_sse: {
        const Matrix &v = in(n, 0), &t = in(n, 1);
        Matrix& d = adj_of(n, 0);
        const double s = 2.0 * g[0];
        for (std::size_t i = 0; i < v.rows(); ++i) d(i, n.attrs.c0) += s * (v(i, n.attrs.c0) - t[i]);
        break;
      }
      case OpKind::bound_slack: {
        const Matrix &v = in(n, 0), &lo = in(n, 1), &hi = in(n, 2);
        Matrix& d = adj_of(n, 0);
        const std::size_t lo_step = lo.rows() == 1 ? 0 : 1, hi_step = hi.rows() == 1 ? 0 : 1;
        for (std::size_t i = 0; i < v.rows(); ++i) {
          const auto vr = v.row(i), lr = lo.row(i * lo_step), hr = hi.row(i * hi_step), gr = g.row(i);
          auto dr = d.row(i);
          for (std::size_t j = 0; j < vr.size(); ++j) {
            if (lr[j] - vr[j] > 0.0) dr[j] -= gr[j];
            else if (vr[j] - hr[j] > 0.0) dr[j] += gr[j];
          }
        }
        break;
      }
    }
  }

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

// Free-function front end; every op validates shapes and names its kind on error.

inline Var matmul(Var a, Var b) { return a.tape->record(OpKind::matmul, {a, b}); }
inline Var operator+(Var a, Var b) { return a.tape->record(OpKind::add, {a, b}); }
inline Var operator-(Var a, Var b) { return a.tape->record(OpKind::subtract, {a, b}); }
inline Var scale(Var a, double s) { return a.tape->record(OpKind::scale, {a}, OpAttrs{.factor = s}); }
inline Var hadamard(Var a, Var b) { return a.tape->record(OpKind::hadamard, {a, b}); }
inline Var relu(Var a) { return a.tape->record(OpKind::relu, {a}); }
inline Var sigmoid(Var a) { return a.tape->record(OpKind::sigmoid, {a}); }
inline Var exp(Var a) { return a.tape->record(OpKind::exp, {a}); }
inline Var row_softmax(Var a) { return a.tape->record(OpKind::row_softmax, {a}); }
inline Var sum_of_squares(Var a) { return a.tape->record(OpKind::sum_of_squares, {a}); }
inline Var sum(Var a) { return a.tape->record(OpKind::sum, {a}); }
inline Var transpose(Var a) { return a.tape->record(OpKind::transpose, {a}); }
inline Var add_row(Var a, Var bias) { return a.tape->record(OpKind::add_row, {a, bias}); }
inline Var bound_slack(Var v, Var lo, Var hi) { return v.tape->record(OpKind::bound_slack, {v, lo, hi}); }

/// a * b plus rows r0, r0 + row_step, ... of c (one row per row of a).
inline Var affine_rows(Var a, Var b, Var c, std::size_t r0, std::size_t row_step = 1) {
  return a.tape->record(OpKind::affine_rows, {a, b, c}, OpAttrs{.r0 = r0, .row_step = row_step});
}

/// Squared error of column `col` of v against a constant column t; same value as
/// sum_of_squares(slice(v, 0, rows, col, col + 1) - t) with fewer nodes.
inline Var column_sse(Var v, Var t, std::size_t col) {
  return v.tape->record(OpKind::column_sse, {v, t}, OpAttrs{.c0 = col});
}

inline Var slice(Var a, std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1) {
  return a.tape->record(OpKind::slice, {a}, OpAttrs{.r0 = r0, .r1 = r1, .c0 = c0, .c1 = c1});
}

inline Var slice_rows(Var a, std::size_t r0, std::size_t r1, std::size_t row_step = 1) {
  return a.tape->record(OpKind::slice, {a},
                        OpAttrs{.r0 = r0, .r1 = r1, .c0 = 0, .c1 = a.tape->value(a).cols(), .row_step = row_step});
}

inline Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no operands");
  return parts.front().tape->record_concat(OpKind::concat_rows, parts);
}

inline Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no operands");
  return parts.front().tape->record_concat(OpKind::concat_cols, parts);
}

}  // namespace cnode::ad
