#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "curvlab/dense_eig.hpp"
#include "curvlab/lanczos.hpp"
#include "curvlab/optim.hpp"
#include "curvlab/precondition.hpp"
#include "curvlab/rng.hpp"
#include "support.hpp"

using namespace curvlab;
using namespace curvlab::testing;

TEST_CASE("lanczos on the identity returns 1.0 exactly") {
  SymmetricOperator eye{100, [](const std::vector<double>& v) { return v; }};
  for (int iters : {1, 5, 40}) {
    LanczosConfig cfg;
    cfg.num_iters = iters;
    cfg.seed = 3;
    const SpectrumEstimate est = lanczos_max_eig(eye, cfg);
    REQUIRE(est.ok());
    REQUIRE(est.lambda_max == doctest::Approx(1.0).epsilon(1e-15));
    REQUIRE(est.iters_run == 1);  // invariant subspace after one step
    REQUIRE(est.residual == doctest::Approx(0.0));
  }
}

TEST_CASE("lanczos recovers the top of diag(1..100) within relative 1e-6") {
  std::vector<double> d(100);
  for (int i = 0; i < 100; ++i) d[static_cast<std::size_t>(i)] = i + 1.0;
  LanczosConfig cfg;
  cfg.num_iters = 40;
  cfg.seed = 5;
  const SpectrumEstimate est = lanczos_max_eig(diagonal_operator(d), cfg);
  REQUIRE(est.ok());
  REQUIRE(std::abs(est.lambda_max - 100.0) / 100.0 < 1e-6);
  REQUIRE(est.lambda_max == est.ritz_values.back());
}

TEST_CASE("lanczos nails the closed-form 2x2 in two iterations") {
  MatrixD m(2, 2);
  m(0, 0) = 2.0; m(0, 1) = 1.0; m(1, 0) = 1.0; m(1, 1) = 2.0;
  LanczosConfig cfg;
  cfg.num_iters = 2;
  cfg.seed = 17;
  const SpectrumEstimate est = lanczos_max_eig(dense_operator(m), cfg);
  REQUIRE(est.ok());
  REQUIRE(est.lambda_max == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("lambda_max is nondecreasing in the iteration count") {
  SeededRng rng(201);
  const MatrixD a = random_symmetric(80, rng);
  const SymmetricOperator op = dense_operator(a);
  double prev = -std::numeric_limits<double>::infinity();
  for (int k : {2, 5, 10, 20, 40}) {
    LanczosConfig cfg;
    cfg.num_iters = k;
    cfg.seed = 7;
    const SpectrumEstimate est = lanczos_max_eig(op, cfg);
    REQUIRE(est.ok());
    REQUIRE(est.lambda_max >= prev - 1e-12);
    prev = est.lambda_max;
  }
}

TEST_CASE("lanczos never exceeds the dense oracle top eigenvalue") {
  SeededRng rng(202);
  for (int trial = 0; trial < 5; ++trial) {
    const MatrixD a = random_symmetric(60, rng);
    const double top = dense_sym_eigs(a).back();
    LanczosConfig cfg;
    cfg.num_iters = 30;
    cfg.seed = static_cast<std::uint64_t>(trial);
    const SpectrumEstimate est = lanczos_max_eig(dense_operator(a), cfg);
    REQUIRE(est.ok());
    REQUIRE(est.lambda_max <= top + 1e-9);
  }
}

TEST_CASE("reorthogonalization keeps the basis orthonormal; disabling it degrades") {
  // Spread spectrum with a dominant top: the classic case where plain
  // Lanczos loses orthogonality quickly.
  SeededRng rng(203);
  std::vector<double> eigs(200);
  for (std::size_t i = 0; i < eigs.size(); ++i)
    eigs[i] = std::pow(10.0, 6.0 * static_cast<double>(i) / 199.0 - 6.0);
  const MatrixD a = symmetric_with_spectrum(eigs, rng);
  const SymmetricOperator op = dense_operator(a);

  LanczosConfig on;
  on.num_iters = 40;
  on.seed = 11;
  const SpectrumEstimate with = lanczos_max_eig(op, on);
  REQUIRE(with.ok());
  REQUIRE(with.ortho_defect <= 1e-8);

  LanczosConfig off = on;
  off.reorthogonalize = false;
  const SpectrumEstimate without = lanczos_max_eig(op, off);
  REQUIRE(without.ok());
  REQUIRE(without.ortho_defect > 1e-4);
}

TEST_CASE("an operator emitting NaN yields a spectral-failure result with the step") {
  SymmetricOperator bad{
      10, [](const std::vector<double>& v) {
        std::vector<double> out = v;
        out[0] = std::numeric_limits<double>::quiet_NaN();
        return out;
      }};
  LanczosConfig cfg;
  cfg.num_iters = 8;
  const SpectrumEstimate est = lanczos_max_eig(bad, cfg);
  REQUIRE_FALSE(est.ok());
  REQUIRE(est.failed_at.has_value());
  REQUIRE(*est.failed_at == 1);
  REQUIRE(std::isnan(est.lambda_max));
}

TEST_CASE("lanczos is deterministic for a fixed seed") {
  SeededRng rng(204);
  const MatrixD a = random_symmetric(40, rng);
  LanczosConfig cfg;
  cfg.num_iters = 25;
  cfg.seed = 99;
  const SpectrumEstimate e1 = lanczos_max_eig(dense_operator(a), cfg);
  const SpectrumEstimate e2 = lanczos_max_eig(dense_operator(a), cfg);
  REQUIRE(e1.lambda_max == e2.lambda_max);
  REQUIRE(e1.ritz_values == e2.ritz_values);
}

TEST_CASE("precondition_operator with D = I is an exact no-op on probes") {
  SeededRng rng(205);
  const MatrixD a = random_symmetric(20, rng);
  const SymmetricOperator op = dense_operator(a);
  const DiagPreconditioner eye{std::vector<double>(20, 1.0)};
  const SymmetricOperator pre = precondition_operator(op, eye);
  for (int trial = 0; trial < 4; ++trial) {
    const std::vector<double> v = rng.normal_vector(20);
    REQUIRE(op.apply(v) == pre.apply(v));
  }
}

TEST_CASE("diagonal case: top eigenvalue of D^-1/2 H D^-1/2 is max h_i/d_i") {
  const std::vector<double> h{3.0, 8.0, 5.0};
  const std::vector<double> d{1.0, 4.0, 0.5};
  const SymmetricOperator pre =
      precondition_operator(diagonal_operator(h), DiagPreconditioner{d});
  LanczosConfig cfg;
  cfg.num_iters = 3;
  cfg.seed = 2;
  const SpectrumEstimate est = lanczos_max_eig(pre, cfg);
  REQUIRE(est.ok());
  // max(3/1, 8/4, 5/0.5) = 10
  REQUIRE(est.lambda_max == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("preconditioned lanczos matches the dense oracle on the explicit transform") {
  SeededRng rng(206);
  const MatrixD h = random_symmetric(30, rng);
  std::vector<double> d(30);
  for (auto& x : d) x = 0.2 + rng.uniform() * 3.0;

  MatrixD transformed(30, 30);
  for (std::size_t i = 0; i < 30; ++i)
    for (std::size_t j = 0; j < 30; ++j)
      transformed(i, j) = h(i, j) / std::sqrt(d[i] * d[j]);
  const double oracle = dense_sym_eigs(transformed).back();

  const SymmetricOperator pre =
      precondition_operator(dense_operator(h), DiagPreconditioner{d});
  LanczosConfig cfg;
  cfg.num_iters = 30;
  cfg.seed = 4;
  const SpectrumEstimate est = lanczos_max_eig(pre, cfg);
  REQUIRE(est.ok());
  REQUIRE(std::abs(est.lambda_max - oracle) <= 1e-8 * std::max(1.0, std::abs(oracle)));

  // Symmetry probe on the preconditioned operator.
  SeededRng probe_rng(1);
  REQUIRE(symmetry_defect(pre, probe_rng, 8) < 1e-8);
}

TEST_CASE("preconditioner rejects non-positive entries") {
  REQUIRE_THROWS_AS(DiagPreconditioner(std::vector<double>{1.0, 0.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(DiagPreconditioner(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("adam preconditioner after one step is |g| + eps") {
  AdamState state = make_adam_state(3);
  std::vector<double> params(3, 0.0);
  const std::vector<double> g{0.5, -2.0, 3.0};
  adam_step(state, params, g, 0.01);
  const DiagPreconditioner d = adam_preconditioner(state, state.eps);
  for (std::size_t i = 0; i < 3; ++i)
    REQUIRE(d.d[i] == doctest::Approx(std::abs(g[i]) + state.eps).epsilon(1e-12));
}

TEST_CASE("adam preconditioner with zero second moment is eps") {
  AdamState state = make_adam_state(4);
  std::vector<double> params(4, 0.0);
  adam_step(state, params, std::vector<double>(4, 0.0), 0.01);
  const DiagPreconditioner d = adam_preconditioner(state, 1e-8);
  for (double x : d.d) REQUIRE(x == 1e-8);
}

TEST_CASE("adam preconditioner matches a hand-rolled EMA over three steps") {
  const std::vector<std::vector<double>> grads{{1.0, -0.5}, {0.25, 2.0}, {-1.5, 0.75}};
  AdamState state = make_adam_state(2);
  std::vector<double> params(2, 0.0);
  for (const auto& g : grads) adam_step(state, params, g, 0.001);

  // Independent EMA recursion with bias correction.
  std::vector<double> v(2, 0.0);
  const double beta2 = state.beta2;
  for (const auto& g : grads)
    for (std::size_t i = 0; i < 2; ++i) v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
  const double bc = 1.0 - std::pow(beta2, 3.0);

  const DiagPreconditioner d = adam_preconditioner(state, state.eps);
  for (std::size_t i = 0; i < 2; ++i)
    REQUIRE(d.d[i] == doctest::Approx(std::sqrt(v[i] / bc) + state.eps).epsilon(1e-14));
}

TEST_CASE("adam preconditioner requires a completed step") {
  const AdamState fresh = make_adam_state(2);
  REQUIRE_THROWS_AS(adam_preconditioner(fresh, 1e-8), std::invalid_argument);
}
