#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include <cnode/numerics/csv.hpp>
#include <cnode/numerics/eigen.hpp>
#include <cnode/numerics/matrix.hpp>
#include <cnode/numerics/rng.hpp>

using namespace cnode;
using Catch::Matchers::WithinAbs;

namespace {

// Laplace expansion over permutations; only used for n <= 4.
ComplexScalar det_shifted(const Matrix& a, ComplexScalar lambda) {
  const std::size_t n = a.rows();
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  ComplexScalar total = 0.0;
  do {
    int inversions = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) inversions += perm[i] > perm[j];
    ComplexScalar term = inversions % 2 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) term *= a(i, perm[i]) - (i == perm[i] ? lambda : ComplexScalar(0.0));
    total += term;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total;
}

}  // namespace

TEST_CASE("matrix construction and element access") {
  const Matrix m = Matrix::from_rows({{1, 2, 3}, {4, 5, 6}});
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m(1, 2) == 6.0);
  CHECK(m[4] == 5.0);
  CHECK(Matrix::identity(3)(1, 1) == 1.0);
  CHECK(Matrix::scalar(2.5).item() == 2.5);
  CHECK_THROWS_AS(m.item(), DimensionError);
  CHECK_THROWS_AS(Matrix::from_rows({{1, 2}, {3}}), DimensionError);
}

TEST_CASE("matmul matches a hand computation and checks shapes") {
  const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
  const Matrix b = Matrix::from_rows({{5, 6}, {7, 8}});
  CHECK(matmul(a, b) == Matrix::from_rows({{19, 22}, {43, 50}}));
  CHECK_THROWS_AS(matmul(a, Matrix(3, 2)), DimensionError);
}

TEST_CASE("accumulating gemm variants agree with explicit transposes") {
  SeededRng rng(3);
  for (std::size_t k : {1u, 2u, 3u, 4u, 5u, 8u, 9u}) {
    const Matrix a = rng_uniform(rng, -1, 1, 7, k);
    const Matrix b = rng_uniform(rng, -1, 1, k, 6);
    const Matrix bt = transpose(b);
    Matrix nn(7, 6, 1.0), nt(7, 6, 1.0), tn(k, k, 0.5);
    matmul_accumulate(a, b, nn);
    matmul_nt_accumulate(a, bt, nt);
    const Matrix c = rng_uniform(rng, -1, 1, 7, k);
    matmul_tn_accumulate(a, c, tn);
    const Matrix want = matmul(a, b);
    const Matrix want_tn = matmul(transpose(a), c);
    for (std::size_t i = 0; i < want.size(); ++i) {
      CHECK_THAT(nn[i], WithinAbs(want[i] + 1.0, 1e-14));
      CHECK_THAT(nt[i], WithinAbs(want[i] + 1.0, 1e-14));
    }
    for (std::size_t i = 0; i < want_tn.size(); ++i) CHECK_THAT(tn[i], WithinAbs(want_tn[i] + 0.5, 1e-14));
  }
}

TEST_CASE("block, row sums and norms") {
  const Matrix m = Matrix::from_rows({{1, -2, 3}, {4, 5, -6}, {7, 8, 9}});
  CHECK(block(m, 1, 3, 0, 2) == Matrix::from_rows({{4, 5}, {7, 8}}));
  CHECK(row_sums(m) == std::vector<double>{2, 3, 24});
  CHECK(norm_inf(m) == 24.0);
  CHECK(max_abs(m) == 9.0);
  CHECK_THROWS_AS(block(m, 2, 4, 0, 1), DimensionError);
}

TEST_CASE("rng streams are reproducible and independent of draw history") {
  SeededRng a(42), b(42);
  for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
  SeededRng c(42);
  const auto s1 = c.split(3);
  c.next_u64();
  auto s2 = c.split(3);
  auto s1c = s1;
  CHECK(s1c.next_u64() == s2.next_u64());
  CHECK(SeededRng(42).split(1).next_u64() != SeededRng(42).split(2).next_u64());
}

TEST_CASE("rng uniform stays inside its interval") {
  SeededRng rng(9);
  double lo = 1.0, hi = 0.0, mean = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.uniform(-2.0, 3.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    mean += u / 20000;
  }
  CHECK(lo >= -2.0);
  CHECK(hi < 3.0);
  CHECK_THAT(mean, WithinAbs(0.5, 0.05));
  CHECK_THROWS_AS(rng.uniform(1.0, 1.0), ArgumentError);
}

TEST_CASE("format_double round-trips exactly") {
  SeededRng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.normal() * std::pow(10.0, rng.uniform(-300, 300));
    CHECK(parse_double(format_double(v), 1) == v);
  }
  CHECK_THROWS_AS(parse_double("1.5x", 7), ParseError);
  CHECK_THROWS_AS(parse_double("", 7), ParseError);
}

TEST_CASE("matrix csv round-trips bit-exactly") {
  SeededRng rng(2);
  const Matrix m = rng_uniform(rng, -1e3, 1e3, 5, 4);
  std::stringstream ss;
  write_matrix_csv(ss, m);
  CHECK(read_matrix_csv(ss) == m);

  std::stringstream ragged("1,2\n3\n");
  CHECK_THROWS_AS(read_matrix_csv(ragged), ParseError);
}

TEST_CASE("eigenvalues of a diagonal and a rotation matrix") {
  const auto d = eigenvalues(Matrix::from_rows({{0.25, 0, 0}, {0, 1.0, 0}, {0, 0, -0.5}}));
  REQUIRE(d.size() == 3);
  CHECK(d[0] == ComplexScalar(1.0, 0.0));
  CHECK(d[1] == ComplexScalar(-0.5, 0.0));
  CHECK(d[2] == ComplexScalar(0.25, 0.0));

  const double t = 0.4;
  const auto r = eigenvalues(Matrix::from_rows({{std::cos(t), -std::sin(t)}, {std::sin(t), std::cos(t)}}));
  REQUIRE(r.size() == 2);
  CHECK_THAT(r[0].real(), WithinAbs(std::cos(t), 1e-14));
  CHECK_THAT(std::abs(r[0].imag()), WithinAbs(std::sin(t), 1e-14));
  CHECK(r[0] == std::conj(r[1]));
  CHECK(r[0].imag() > 0.0);
}

TEST_CASE("eigenvalues satisfy the characteristic polynomial") {
  SeededRng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 4;
    const Matrix a = rng_uniform(rng, -3, 3, n, n);
    const auto ev = eigenvalues(a);
    REQUIRE(ev.size() == n);
    for (const auto& l : ev) CHECK(std::abs(det_shifted(a, l)) < 1e-6 * (1.0 + norm_frobenius(a)));
    // Trace and sum of eigenvalues agree.
    ComplexScalar s = 0.0;
    double tr = 0.0;
    for (std::size_t i = 0; i < n; ++i) tr += a(i, i), s += ev[i];
    CHECK_THAT(s.real(), WithinAbs(tr, 1e-10));
    CHECK_THAT(s.imag(), WithinAbs(0.0, 1e-10));
  }
}

TEST_CASE("triangular matrices return their diagonal exactly") {
  const Matrix upper = Matrix::from_rows({{0.3, 5, -2}, {0, -0.7, 1}, {0, 0, 0.9}});
  const auto ev = eigenvalues(upper);
  CHECK(ev[0] == ComplexScalar(0.9, 0));
  CHECK(ev[1] == ComplexScalar(-0.7, 0));
  CHECK(ev[2] == ComplexScalar(0.3, 0));
  CHECK(eigenvalues(transpose(upper)) == ev);
}

TEST_CASE("spectral radius lies between min and max row sums for nonnegative matrices") {
  SeededRng rng(7);
  for (int t = 0; t < 200; ++t) {
    const Matrix a = rng_uniform(rng, 0.0, 1.0, 4, 4);
    const auto rs = row_sums(a);
    const double rho = spectral_radius(a);
    CHECK(rho >= *std::min_element(rs.begin(), rs.end()) - 1e-12);
    CHECK(rho <= *std::max_element(rs.begin(), rs.end()) + 1e-12);
  }
}

TEST_CASE("eigenvalues reject bad input") {
  CHECK_THROWS_AS(eigenvalues(Matrix(2, 3)), DimensionError);
  Matrix bad = Matrix::identity(2);
  bad(0, 1) = NAN;
  CHECK_THROWS_AS(eigenvalues(bad), NumericError);
  CHECK(eigenvalues(Matrix()).empty());
}

TEST_CASE("sort order is by magnitude, then real part") {
  std::vector<ComplexScalar> v{{0.5, 0}, {-1, 0}, {1, 0}, {0, 0.5}};
  sort_eigenvalues(v);
  CHECK(v[0] == ComplexScalar(1, 0));
  CHECK(v[1] == ComplexScalar(-1, 0));
  CHECK(v[2] == ComplexScalar(0.5, 0));
  CHECK(v[3] == ComplexScalar(0, 0.5));
}
