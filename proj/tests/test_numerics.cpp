#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "curvlab/dense_eig.hpp"
#include "curvlab/operators.hpp"
#include "curvlab/rng.hpp"
#include "curvlab/tridiagonal.hpp"
#include "support.hpp"

using namespace curvlab;
using namespace curvlab::testing;

TEST_CASE("dense_sym_eigs identity and closed-form 2x2") {
  MatrixD eye(3, 3);
  for (int i = 0; i < 3; ++i) eye(i, i) = 1.0;
  const auto eigs = dense_sym_eigs(eye);
  REQUIRE(eigs.size() == 3);
  for (double v : eigs) REQUIRE(v == doctest::Approx(1.0).epsilon(1e-14));

  MatrixD m(2, 2);
  m(0, 0) = 2.0; m(0, 1) = 1.0; m(1, 0) = 1.0; m(1, 1) = 2.0;
  const auto e2 = dense_sym_eigs(m);
  REQUIRE(e2[0] == doctest::Approx(1.0).epsilon(1e-13));
  REQUIRE(e2[1] == doctest::Approx(3.0).epsilon(1e-13));
}

TEST_CASE("dense_sym_eigs vs Sturm-count oracle on a random symmetric 50x50") {
  SeededRng rng(101);
  const MatrixD a = random_symmetric(50, rng);
  const auto eigs = dense_sym_eigs(a);
  REQUIRE(std::is_sorted(eigs.begin(), eigs.end()));

  // Independent tridiagonalization + Sturm counts bracket each eigenvalue.
  const NaiveTridiag t = naive_tridiagonalize(a);
  double scale = 0.0;
  for (double v : eigs) scale = std::max(scale, std::abs(v));
  const double delta = 1e-8 * scale;
  for (std::size_t i = 0; i < eigs.size(); ++i) {
    REQUIRE(naive_count_below(t, eigs[i] - delta) <= static_cast<int>(i));
    REQUIRE(naive_count_below(t, eigs[i] + delta) >= static_cast<int>(i) + 1);
  }
}

TEST_CASE("dense_sym_eigs eigenvalue sum equals trace") {
  SeededRng rng(102);
  const MatrixD a = random_symmetric(64, rng, 2.0);
  const auto eigs = dense_sym_eigs(a);
  double sum = 0.0, trace = 0.0;
  for (double v : eigs) sum += v;
  for (std::size_t i = 0; i < a.rows; ++i) trace += a(i, i);
  REQUIRE(sum == doctest::Approx(trace).epsilon(1e-10));
}

TEST_CASE("dense_sym_eigs_full reconstruction error below 1e-10") {
  SeededRng rng(103);
  const MatrixD a = random_symmetric(30, rng);
  const DenseEigFull full = dense_sym_eigs_full(a);

  MatrixD recon(a.rows, a.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.rows; ++k)
        acc += full.eigenvectors(i, k) * full.eigenvalues[k] * full.eigenvectors(j, k);
      recon(i, j) = acc;
    }
  double err = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    err += (recon.data[i] - a.data[i]) * (recon.data[i] - a.data[i]);
    norm += a.data[i] * a.data[i];
  }
  REQUIRE(std::sqrt(err / norm) < 1e-10);
}

TEST_CASE("dense_sym_eigs rejects asymmetric input") {
  MatrixD bad(3, 3);
  bad(0, 1) = 1.0;
  bad(1, 0) = 1.0 + 1e-3;
  bad(0, 0) = bad(1, 1) = bad(2, 2) = 1.0;
  REQUIRE_THROWS_AS(dense_sym_eigs(bad), std::invalid_argument);
  REQUIRE_THROWS_AS(dense_sym_eigs(MatrixD(2, 3)), std::invalid_argument);
}

TEST_CASE("tridiag_max_eig trivial cases") {
  REQUIRE(tridiag_max_eig({{5.5}, {}}) == doctest::Approx(5.5).epsilon(1e-15));
  // diag [0,0], off [1]: eigenvalues are -1 and 1.
  REQUIRE(tridiag_max_eig({{0.0, 0.0}, {1.0}}) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("tridiag eigenvalues match the dense oracle on the expanded matrix") {
  SeededRng rng(104);
  const int k = 40;
  TriDiagonal t;
  for (int i = 0; i < k; ++i) t.diagonal.push_back(rng.normal());
  for (int i = 0; i + 1 < k; ++i) t.off_diagonal.push_back(std::abs(rng.normal()) + 0.1);

  MatrixD dense(k, k);
  for (int i = 0; i < k; ++i) dense(i, i) = t.diagonal[i];
  for (int i = 0; i + 1 < k; ++i)
    dense(i, i + 1) = dense(i + 1, i) = t.off_diagonal[static_cast<std::size_t>(i)];

  const auto oracle = dense_sym_eigs(dense);
  const auto mine = tridiag_eigs(t);
  double scale = std::max(std::abs(oracle.front()), std::abs(oracle.back()));
  for (int i = 0; i < k; ++i)
    REQUIRE(std::abs(mine[i] - oracle[i]) <= 1e-10 * scale);
  REQUIRE(std::abs(tridiag_max_eig(t) - oracle.back()) <= 1e-10 * scale);
}

TEST_CASE("tridiag_max_eig stays within Gershgorin bounds") {
  SeededRng rng(105);
  for (int trial = 0; trial < 20; ++trial) {
    TriDiagonal t;
    const int k = 1 + static_cast<int>(rng.uniform_index(12));
    for (int i = 0; i < k; ++i) t.diagonal.push_back(3.0 * rng.normal());
    for (int i = 0; i + 1 < k; ++i) t.off_diagonal.push_back(rng.normal());
    const auto [lo, hi] = gershgorin_bounds(t);
    const double top = tridiag_max_eig(t);
    REQUIRE(top >= lo - 1e-12);
    REQUIRE(top <= hi + 1e-12);
  }
}

TEST_CASE("tridiagonal validation") {
  REQUIRE_THROWS_AS(validate(TriDiagonal{{}, {}}), std::invalid_argument);
  REQUIRE_THROWS_AS(validate(TriDiagonal{{1.0, 2.0}, {}}), std::invalid_argument);
}

TEST_CASE("rng streams replay and fork independently") {
  SeededRng a(42), b(42);
  for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());

  SeededRng base(7);
  SeededRng f1 = base.fork(1);
  SeededRng f2 = base.fork(2);
  REQUIRE(f1.next_u64() != f2.next_u64());

  // uniform() in [0, 1)
  SeededRng u(3);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.uniform();
    REQUIRE(x >= 0.0);
    REQUIRE(x < 1.0);
  }
}

TEST_CASE("rng normals have sane first two moments") {
  SeededRng rng(8);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  // 5 sigma bounds for the seeded draw.
  REQUIRE(std::abs(mean) < 5.0 / std::sqrt(static_cast<double>(n)));
  REQUIRE(std::abs(var - 1.0) < 5.0 * std::sqrt(2.0 / n));
}

TEST_CASE("symmetry probe accepts symmetric operators and flags asymmetric ones") {
  SeededRng rng(106);
  const MatrixD sym = random_symmetric(25, rng);
  SeededRng probe_rng(1);
  REQUIRE(symmetry_defect(dense_operator(sym), probe_rng, 8) < 1e-8);

  MatrixD asym = sym;
  asym(3, 7) += 0.5;  // break symmetry
  SeededRng probe_rng2(1);
  REQUIRE(symmetry_defect(dense_operator(asym), probe_rng2, 8) > 1e-8);

  const std::vector<double> d{1.0, 2.0, 3.0};
  SeededRng probe_rng3(1);
  REQUIRE(symmetry_defect(diagonal_operator(d), probe_rng3, 8) < 1e-12);
}
