#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "fedfwd/errors.hpp"
#include "fedfwd/finite_diff.hpp"
#include "fedfwd/matrix.hpp"
#include "fedfwd/rng.hpp"

using namespace fedfwd;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, RngStream& rng, double lo = -1.0,
                     double hi = 1.0) {
  Matrix m(r, c);
  for (double& v : m.data()) v = rng.next_uniform(lo, hi);
  return m;
}

// Scalar reference multiply; deliberately the plainest possible loop so the
// production kernels are checked against independent arithmetic.
Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      c(i, j) = acc;
    }
  return c;
}

void check_close(const Matrix& got, const Matrix& want, double tol) {
  REQUIRE(got.same_shape(want));
  for (std::size_t i = 0; i < got.rows(); ++i)
    for (std::size_t j = 0; j < got.cols(); ++j) {
      const double scale = std::max(1.0, std::abs(want(i, j)));
      CHECK(std::abs(got(i, j) - want(i, j)) <= tol * scale);
    }
}

}  // namespace

TEST_CASE("matrix basics: shape, access, identity, row_vector") {
  Matrix m(2, 3);
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m.size() == 6);
  m(1, 2) = 5.0;
  CHECK(m(1, 2) == 5.0);
  CHECK(m.row_span(1)[2] == 5.0);

  Matrix i3 = Matrix::identity(3);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) CHECK(i3(r, c) == (r == c ? 1.0 : 0.0));

  const std::vector<double> v{1.0, 2.0, 3.0};
  Matrix rv = Matrix::row_vector(v);
  CHECK(rv.rows() == 1);
  CHECK(rv.cols() == 3);
  CHECK(rv(0, 1) == 2.0);

  Matrix a(2, 2), b(2, 2);
  a(0, 0) = 1.0;
  b(0, 0) = 1.0;
  CHECK(a == b);
  b(1, 1) = -0.5;
  CHECK_FALSE(a == b);
}

TEST_CASE("matmul variants agree with a scalar reference loop") {
  RngStream rng(11, {1});
  for (int trial = 0; trial < 10; ++trial) {
    RngStream t = rng.child(static_cast<std::uint64_t>(trial));
    const std::size_t r = 1 + t.next_below(20);
    const std::size_t k = 1 + t.next_below(40);
    const std::size_t c = 1 + t.next_below(20);
    Matrix a = random_matrix(r, k, t);
    Matrix b = random_matrix(k, c, t);

    Matrix want = naive_matmul(a, b);
    check_close(matmul(a, b), want, 1e-12);
    check_close(matmul_nt(a, transpose(b)), want, 1e-12);
    check_close(matmul_tn(transpose(a), b), want, 1e-12);
  }
}

TEST_CASE("matmul results are reproducible bitwise") {
  RngStream rng(12, {2});
  Matrix a = random_matrix(7, 33, rng);
  Matrix b = random_matrix(9, 33, rng);
  CHECK(matmul_nt(a, b) == matmul_nt(a, b));
  CHECK(matmul(a, transpose(b)) == matmul(a, transpose(b)));
}

TEST_CASE("multiplying by the identity reproduces the matrix") {
  RngStream rng(13, {3});
  Matrix a = random_matrix(5, 8, rng, 0.5, 1.5);
  check_close(matmul(a, Matrix::identity(8)), a, 0.0);
  check_close(matmul_nt(a, Matrix::identity(8)), a, 0.0);
}

TEST_CASE("matmul rejects mismatched inner dimensions") {
  Matrix a(2, 3), b(4, 2), c(4, 3);
  CHECK_THROWS_AS(matmul(a, b), ShapeError);
  CHECK_THROWS_AS(matmul_nt(a, b), ShapeError);   // b must have 3 columns
  CHECK_THROWS_AS(matmul_tn(a, c), ShapeError);   // a^T needs a.rows == b.rows
}

TEST_CASE("matmul flags non-finite products") {
  Matrix a(1, 2), b(2, 1);
  a(0, 0) = std::numeric_limits<double>::infinity();
  a(0, 1) = 1.0;
  b(0, 0) = 1.0;
  b(1, 0) = 1.0;
  CHECK_THROWS_AS(matmul(a, b), NumericError);

  Matrix big(1, 2), big2(2, 1);
  big(0, 0) = 1e308;
  big(0, 1) = 1e308;
  big2(0, 0) = 10.0;
  big2(1, 0) = 10.0;
  CHECK_THROWS_AS(matmul(big, big2), NumericError);  // overflow to inf
}

TEST_CASE("transpose is an involution and swaps indices") {
  RngStream rng(14, {4});
  Matrix a = random_matrix(4, 7, rng);
  Matrix t = transpose(a);
  REQUIRE(t.rows() == 7);
  REQUIRE(t.cols() == 4);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) CHECK(t(j, i) == a(i, j));
  CHECK(transpose(t) == a);
}

TEST_CASE("all_finite detects nan and inf") {
  Matrix a(2, 2);
  CHECK(all_finite(a));
  a(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_FALSE(all_finite(a));
  a(0, 1) = std::numeric_limits<double>::infinity();
  CHECK_FALSE(all_finite(a));
  const std::vector<double> ok{1.0, 2.0};
  const std::vector<double> bad{1.0, std::numeric_limits<double>::quiet_NaN()};
  CHECK(all_finite(std::span<const double>(ok)));
  CHECK_FALSE(all_finite(std::span<const double>(bad)));
}

TEST_CASE("rng: identical identity gives identical draws") {
  RngStream a(42, {1, 2, 3});
  RngStream b(42, {1, 2, 3});
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  for (int i = 0; i < 100; ++i) CHECK(a.next_double() == b.next_double());
  for (int i = 0; i < 100; ++i) CHECK(a.next_gaussian() == b.next_gaussian());
}

TEST_CASE("rng: different seed or path gives different draws") {
  RngStream a(42, {1});
  RngStream b(43, {1});
  RngStream c(42, {2});
  RngStream d(42, {1, 0});
  bool differs_seed = false, differs_path = false, differs_len = false;
  for (int i = 0; i < 8; ++i) {
    const std::uint64_t x = a.next_u64();
    differs_seed |= x != b.next_u64();
    differs_path |= x != c.next_u64();
    differs_len |= x != d.next_u64();
  }
  CHECK(differs_seed);
  CHECK(differs_path);
  CHECK(differs_len);
}

TEST_CASE("rng: child streams do not depend on the parent's position") {
  RngStream parent(7, {9});
  RngStream before = parent.child(4);
  parent.next_u64();
  parent.next_double();
  parent.next_gaussian();
  RngStream after = parent.child(4);
  for (int i = 0; i < 50; ++i) CHECK(before.next_u64() == after.next_u64());

  // And the child equals the explicitly derived stream.
  RngStream direct(7, {9, 4});
  RngStream fresh = RngStream(7, {9}).child(4);
  for (int i = 0; i < 50; ++i) CHECK(direct.next_u64() == fresh.next_u64());
}

TEST_CASE("rng: derive_stream matches the constructor") {
  const std::vector<std::uint64_t> path{3, 1, 4};
  RngStream a = derive_stream(99, path);
  RngStream b(99, {3, 1, 4});
  for (int i = 0; i < 20; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("rng: uniform draws stay in range") {
  RngStream rng(5, {1});
  for (int i = 0; i < 1000; ++i) {
    const double d = rng.next_double();
    CHECK(d >= 0.0);
    CHECK(d < 1.0);
    const double u = rng.next_uniform(-2.0, 3.0);
    CHECK(u >= -2.0);
    CHECK(u < 3.0);
    CHECK(rng.next_below(7) < 7);
  }
  CHECK(rng.next_below(1) == 0);
}

TEST_CASE("rng: next_below is close to uniform") {
  RngStream rng(6, {2});
  const int n = 20000;
  std::vector<int> counts(10, 0);
  for (int i = 0; i < n; ++i) ++counts[rng.next_below(10)];
  // 3 sigma for Binomial(20000, 0.1) is about 127.
  for (int c : counts) CHECK(std::abs(c - 2000) <= 130);
}

TEST_CASE("rng: gaussian moments are sane") {
  RngStream rng(8, {3});
  const int n = 20000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.next_gaussian();
    sum += g;
    sum2 += g * g;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 0.022);      // 3 sigma of the sample mean
  CHECK(std::abs(var - 1.0) < 0.04);  // 3 sigma of the sample variance
}

TEST_CASE("rng: shuffle permutes and is reproducible") {
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  std::vector<int> w = v;
  RngStream a(10, {4});
  RngStream b(10, {4});
  a.shuffle(v);
  b.shuffle(w);
  CHECK(v == w);
  CHECK(v != std::vector<int>(v.size()) /* not all zero */);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> expect(50);
  std::iota(expect.begin(), expect.end(), 0);
  CHECK(sorted == expect);
  bool moved = false;
  for (std::size_t i = 0; i < v.size(); ++i) moved |= v[i] != static_cast<int>(i);
  CHECK(moved);
}

TEST_CASE("finite differences recover known gradients") {
  RngStream rng(21, {5});
  Matrix x = random_matrix(3, 4, rng);

  auto sum_sq = [](const Matrix& m) {
    double s = 0.0;
    for (double v : m.data()) s += v * v;
    return s;
  };
  Matrix g = finite_diff_grad(sum_sq, x, 1e-5);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j)
      CHECK(std::abs(g(i, j) - 2.0 * x(i, j)) < 1e-8);

  auto sum_sin = [](const Matrix& m) {
    double s = 0.0;
    for (double v : m.data()) s += std::sin(v);
    return s;
  };
  Matrix gs = finite_diff_grad(sum_sin, x, 1e-5);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j)
      CHECK(std::abs(gs(i, j) - std::cos(x(i, j))) < 1e-8);
}

TEST_CASE("finite differences validate inputs") {
  Matrix x(2, 2);
  auto f = [](const Matrix&) { return 1.0; };
  CHECK_THROWS_AS(finite_diff_grad(f, x, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(finite_diff_grad(f, x, -1e-5), std::invalid_argument);
  auto bad = [](const Matrix&) { return std::numeric_limits<double>::quiet_NaN(); };
  CHECK_THROWS_AS(finite_diff_grad(bad, x, 1e-5), NumericError);
}
