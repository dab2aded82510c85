#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <cnode/autodiff/fd_check.hpp>
#include <cnode/autodiff/op_cases.hpp>
#include <cnode/autodiff/tape.hpp>

using namespace cnode;
using namespace cnode::ad;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("gradient of a quadratic form") {
  // f(x) = x' Q x for symmetric Q has gradient 2 Q x.
  Tape t;
  const Matrix q = Matrix::from_rows({{2, 1}, {1, 3}});
  const Var x = t.leaf(Matrix::column({1.0, -2.0}));
  const Var f = matmul(transpose(x), matmul(t.constant(q), x));
  t.backward(f);
  CHECK(t.value(f).item() == 2 - 4 + 12);
  CHECK(t.grad(x) == Matrix::column({2 * (2 - 2), 2 * (1 - 6)}));
}

TEST_CASE("leaf used twice accumulates both contributions") {
  Tape t;
  const Var x = t.leaf(Matrix::scalar(3.0));
  const Var y = hadamard(x, x) + scale(x, 2.0);
  t.backward(y);
  CHECK(t.grad(x).item() == 8.0);
  t.backward(y);  // idempotent
  CHECK(t.grad(x).item() == 8.0);
}

TEST_CASE("constants carry no gradient and grad() guards misuse") {
  Tape t;
  const Var c = t.constant(Matrix::scalar(1.0));
  const Var x = t.leaf(Matrix::scalar(2.0));
  CHECK_THROWS_AS(t.grad(x), ArgumentError);
  const Var y = hadamard(c, x);
  CHECK_FALSE(t.needs_grad(c));
  CHECK(t.needs_grad(y));
  t.backward(y);
  CHECK_THROWS_AS(t.grad(c), ArgumentError);
  CHECK_THROWS_AS(t.backward(concat_rows({x, x})), ArgumentError);
}

TEST_CASE("operands from another tape are rejected") {
  Tape a, b;
  const Var x = a.leaf(Matrix::scalar(1.0));
  const Var y = b.leaf(Matrix::scalar(1.0));
  CHECK_THROWS_AS(x + y, ArgumentError);
}

TEST_CASE("shape errors name the operation") {
  Tape t;
  const Var a = t.leaf(Matrix(2, 3));
  const Var b = t.leaf(Matrix(2, 2));
  CHECK_THROWS_AS(a + b, DimensionError);
  CHECK_THROWS_AS(matmul(a, a), DimensionError);
  CHECK_THROWS_AS(add_row(a, t.leaf(Matrix(1, 2))), DimensionError);
  CHECK_THROWS_WITH(hadamard(a, b), Catch::Matchers::ContainsSubstring("hadamard"));
}

TEST_CASE("row_softmax rows sum to one and survive large inputs") {
  Tape t;
  const Var x = t.leaf(Matrix::from_rows({{1000, 1001, 999}, {-5, 0, 5}}));
  const Matrix& s = t.value(row_softmax(x));
  for (std::size_t i = 0; i < 2; ++i) CHECK_THAT(s(i, 0) + s(i, 1) + s(i, 2), WithinAbs(1.0, 1e-15));
  CHECK(all_finite(s));
}

TEST_CASE("relu derivative at zero is zero") {
  Tape t;
  const Var x = t.leaf(Matrix::from_rows({{-1.0, 0.0, 2.0}}));
  t.backward(sum(relu(x)));
  CHECK(t.grad(x) == Matrix::from_rows({{0.0, 0.0, 1.0}}));
}

TEST_CASE("bound_slack broadcasts a single bound row") {
  Tape t;
  const Var v = t.leaf(Matrix::from_rows({{-1.0, 0.5}, {3.0, 1.0}}));
  const Var lo = t.constant(Matrix::from_rows({{0.0, 0.0}}));
  const Var hi = t.constant(Matrix::from_rows({{2.0, 2.0}}));
  const Var s = bound_slack(v, lo, hi);
  CHECK(t.value(s) == Matrix::from_rows({{1.0, 0.0}, {1.0, 0.0}}));
  t.backward(sum(s));
  CHECK(t.grad(v) == Matrix::from_rows({{-1.0, 0.0}, {1.0, 0.0}}));
  CHECK_THROWS_AS(bound_slack(v, t.leaf(Matrix(1, 2)), hi), ArgumentError);
  CHECK_THROWS_AS(bound_slack(v, t.constant(Matrix(3, 2)), t.constant(Matrix(3, 2))), DimensionError);
}

TEST_CASE("affine_rows equals matmul plus the strided rows") {
  Tape t;
  const Var a = t.leaf(Matrix::from_rows({{1, 2}, {3, 4}}));
  const Var b = t.leaf(Matrix::from_rows({{1, 0, 1}, {0, 1, 1}}));
  const Var c = t.leaf(Matrix::from_rows({{10, 10, 10}, {20, 20, 20}, {30, 30, 30}, {40, 40, 40}, {50, 50, 50}}));
  const Var y = affine_rows(a, b, c, 1, 2);
  CHECK(t.value(y) == Matrix::from_rows({{21, 22, 23}, {43, 44, 47}}));
  CHECK_THROWS_AS(affine_rows(a, b, c, 3, 2), DimensionError);
}

TEST_CASE("column_sse needs a constant column target") {
  Tape t;
  const Var v = t.leaf(Matrix::from_rows({{1, 2}, {3, 4}}));
  const Var e = column_sse(v, t.constant(Matrix::column({0.0, 1.0})), 1);
  CHECK(t.value(e).item() == 4.0 + 9.0);
  CHECK_THROWS_AS(column_sse(v, t.leaf(Matrix::column({0.0, 1.0})), 1), ArgumentError);
  CHECK_THROWS_AS(column_sse(v, t.constant(Matrix::column({0.0, 1.0})), 2), DimensionError);
}

TEST_CASE("slice with a row step and concat") {
  Tape t;
  const Var x = t.leaf(Matrix::from_rows({{0, 1}, {2, 3}, {4, 5}, {6, 7}, {8, 9}}));
  CHECK(t.value(slice_rows(x, 1, 5, 2)) == Matrix::from_rows({{2, 3}, {6, 7}}));
  CHECK(t.value(slice(x, 0, 2, 1, 2)) == Matrix::column({1, 3}));
  CHECK(t.value(concat_cols({slice(x, 0, 1, 0, 1), slice(x, 4, 5, 1, 2)})) == Matrix::from_rows({{0, 9}}));
}

TEST_CASE("every op kind passes the finite-difference check") {
  for (const auto& s : check_all_ops(40, 2024)) {
    INFO(to_string(s.kind));
    CHECK(s.worst < 1e-5);
  }
}

TEST_CASE("finite_difference_check detects a wrong gradient") {
  // relu with its input placed exactly at the kink is the one non-smooth case;
  // excluding those entries restores agreement.
  const TapeFunction f = [](Tape&, std::span<const Var> v) { return sum(relu(v[0])); };
  const std::vector<Matrix> at_kink{Matrix::from_rows({{0.0, 1.0}})};
  CHECK(finite_difference_check(f, at_kink, 1e-6) > 0.1);
  CHECK(finite_difference_check(f, at_kink, 1e-6, [](std::size_t, std::size_t k) { return k == 0; }) < 1e-8);
  CHECK_THROWS_AS(finite_difference_check(f, at_kink, 0.0), ArgumentError);
}

TEST_CASE("sigmoid and exp gradients match closed forms") {
  Tape t;
  const Var x = t.leaf(Matrix::from_rows({{-2.0, 0.0, 3.0}}));
  t.backward(sum(sigmoid(x)));
  for (std::size_t i = 0; i < 3; ++i) {
    const double s = 1.0 / (1.0 + std::exp(-t.value(x)[i]));
    CHECK_THAT(t.grad(x)[i], WithinRel(s * (1 - s), 1e-14));
  }
  Tape u;
  const Var y = u.leaf(Matrix::from_rows({{0.5, -1.0}}));
  u.backward(sum(ad::exp(y)));
  CHECK_THAT(u.grad(y)[0], WithinRel(std::exp(0.5), 1e-15));
}
