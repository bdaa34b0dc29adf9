#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "curvlab/kernels.hpp"
#include "curvlab/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace curvlab;

namespace {

MatrixD random_matrix(std::size_t r, std::size_t c, SeededRng& rng) {
  MatrixD m(r, c);
  for (auto& x : m.data) x = rng.normal();
  return m;
}

MatrixD transpose(const MatrixD& m) {
  MatrixD t(m.cols, m.rows);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) t(j, i) = m(i, j);
  return t;
}

}  // namespace

TEST_CASE("matmul variants agree with the serial reference bitwise") {
  SeededRng rng(11);
  const MatrixD a = random_matrix(37, 53, rng);
  const MatrixD b = random_matrix(41, 53, rng);

  MatrixD par, ser;
  kernels::matmul_nt(a, b, par);
  kernels::ref::matmul_nt(a, b, ser);
  REQUIRE(par.data == ser.data);

  const MatrixD c = random_matrix(53, 29, rng);
  kernels::matmul_nn(a, c, par);
  kernels::ref::matmul_nn(a, c, ser);
  REQUIRE(par.data == ser.data);

  const MatrixD d = random_matrix(53, 29, rng);
  MatrixD par_tn, ser_tn;
  kernels::matmul_tn(c, d, par_tn);
  kernels::ref::matmul_tn(c, d, ser_tn);
  REQUIRE(par_tn.data == ser_tn.data);
}

TEST_CASE("matmul_nt equals matmul_nn against the explicit transpose") {
  SeededRng rng(12);
  const MatrixD a = random_matrix(19, 31, rng);
  const MatrixD b = random_matrix(23, 31, rng);
  MatrixD via_nt, via_nn;
  kernels::matmul_nt(a, b, via_nt);
  kernels::matmul_nn(a, transpose(b), via_nn);
  REQUIRE(via_nt.rows == via_nn.rows);
  REQUIRE(via_nt.data == via_nn.data);
}

TEST_CASE("chunked dot matches the plain serial sum") {
  SeededRng rng(13);
  std::vector<double> x(50000), y(50000);
  for (auto& v : x) v = rng.normal();
  for (auto& v : y) v = rng.normal();
  const double chunked = kernels::dot(x, y);
  const double plain = kernels::ref::dot(x, y);
  REQUIRE(chunked == doctest::Approx(plain).epsilon(1e-13));

  // Below one chunk the paths are identical.
  std::vector<double> xs(x.begin(), x.begin() + 1000);
  std::vector<double> ys(y.begin(), y.begin() + 1000);
  REQUIRE(kernels::dot(xs, ys) == kernels::ref::dot(xs, ys));
}

#ifdef _OPENMP
TEST_CASE("results do not depend on the thread count") {
  SeededRng rng(14);
  const MatrixD a = random_matrix(64, 300, rng);
  const MatrixD b = random_matrix(48, 300, rng);
  std::vector<double> x(100000), y(100000);
  for (auto& v : x) v = rng.normal();
  for (auto& v : y) v = rng.normal();

  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  MatrixD c1;
  kernels::matmul_nt(a, b, c1);
  const double d1 = kernels::dot(x, y);
  omp_set_num_threads(2);
  MatrixD c2;
  kernels::matmul_nt(a, b, c2);
  const double d2 = kernels::dot(x, y);
  omp_set_num_threads(saved);

  REQUIRE(c1.data == c2.data);
  REQUIRE(d1 == d2);
}
#endif

TEST_CASE("axpy, scale, col_sums, add_row_vector") {
  SeededRng rng(15);
  std::vector<double> x(777), y(777);
  for (auto& v : x) v = rng.normal();
  for (auto& v : y) v = rng.normal();
  std::vector<double> expect = y;
  for (std::size_t i = 0; i < y.size(); ++i) expect[i] += 2.5 * x[i];
  kernels::axpy(2.5, x, y);
  REQUIRE(y == expect);

  std::vector<double> z = x;
  kernels::scale(z, -3.0);
  for (std::size_t i = 0; i < z.size(); ++i) REQUIRE(z[i] == -3.0 * x[i]);

  MatrixD m = random_matrix(9, 5, rng);
  const std::vector<double> sums = kernels::col_sums(m);
  for (std::size_t j = 0; j < m.cols; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m.rows; ++i) acc += m(i, j);
    REQUIRE(sums[j] == acc);
  }

  MatrixD before = m;
  std::vector<double> row{1, 2, 3, 4, 5};
  kernels::add_row_vector(m, row);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) REQUIRE(m(i, j) == before(i, j) + row[j]);
}

TEST_CASE("global_l2_norm basics") {
  REQUIRE(global_l2_norm({3.0, 4.0}) == 5.0);
  REQUIRE(global_l2_norm({0.0, 0.0, 0.0}) == 0.0);
  REQUIRE(global_l2_norm({}) == 0.0);

  // Layout independence: segment norms combine like the flat concatenation.
  SeededRng rng(16);
  std::vector<double> a(100), b(257);
  for (auto& v : a) v = rng.normal();
  for (auto& v : b) v = rng.normal();
  std::vector<double> flat = a;
  flat.insert(flat.end(), b.begin(), b.end());
  const double na = global_l2_norm(a), nb = global_l2_norm(b);
  REQUIRE(global_l2_norm(flat) ==
          doctest::Approx(std::sqrt(na * na + nb * nb)).epsilon(1e-14));
}

TEST_CASE("dimension mismatches are rejected") {
  MatrixD a(3, 4), b(5, 6);
  MatrixD c;
  REQUIRE_THROWS_AS(kernels::matmul_nt(a, b, c), std::invalid_argument);
  REQUIRE_THROWS_AS(kernels::dot(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}),
                    std::invalid_argument);
}
