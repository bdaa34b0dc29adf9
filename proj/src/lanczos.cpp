#include "curvlab/lanczos.hpp"

#include <cmath>
#include <stdexcept>

#include "curvlab/kernels.hpp"
#include "curvlab/rng.hpp"

namespace curvlab {

namespace {

constexpr double kBreakdownTol = 1e-12;

bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

SpectrumEstimate lanczos_max_eig(const SymmetricOperator& op, const LanczosConfig& config) {
  if (op.dim == 0) throw std::invalid_argument("lanczos_max_eig: operator dim must be >= 1");
  if (config.num_iters < 1) throw std::invalid_argument("lanczos_max_eig: num_iters must be >= 1");

  const std::size_t n = op.dim;
  const int k_max = static_cast<int>(std::min<std::size_t>(config.num_iters, n));

  SeededRng rng(config.seed);
  std::vector<double> q = rng.normal_vector(n);
  {
    const double norm = kernels::nrm2(q);
    for (double& x : q) x /= norm;
  }

  SpectrumEstimate est;
  std::vector<std::vector<double>> basis;  // float64 Lanczos vectors
  basis.reserve(k_max);
  std::vector<double> alpha, beta;
  double beta_next = 0.0;

  for (int j = 0; j < k_max; ++j) {
    basis.push_back(q);
    std::vector<double> r = op.apply(q);
    if (!all_finite(r)) {
      est.failed_at = j + 1;
      est.iters_run = j;
      return est;
    }

    const double a = kernels::dot(q, r);
    alpha.push_back(a);
    kernels::axpy(-a, q, r);
    if (j > 0) kernels::axpy(-beta[j - 1], basis[j - 1], r);

    if (config.reorthogonalize) {
      // Two classical Gram-Schmidt passes against the full basis.
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& qi : basis) kernels::axpy(-kernels::dot(qi, r), qi, r);
    }

    beta_next = kernels::nrm2(r);
    if (!std::isfinite(beta_next)) {
      est.failed_at = j + 1;
      est.iters_run = j;
      return est;
    }
    est.iters_run = j + 1;
    if (beta_next < kBreakdownTol) {
      beta_next = 0.0;
      break;
    }
    if (j + 1 < k_max) {
      beta.push_back(beta_next);
      for (double& x : r) x /= beta_next;
      q = std::move(r);
    }
  }

  TriDiagonal t{alpha, beta};
  t.diagonal.resize(est.iters_run);
  t.off_diagonal.resize(est.iters_run > 0 ? est.iters_run - 1 : 0);
  est.ritz_values = tridiag_eigs(t);
  est.lambda_max = est.ritz_values.back();

  const std::vector<double> y = tridiag_eigenvector(t, est.lambda_max);
  est.residual = beta_next * std::abs(y.back());

  double defect = 0.0;
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j2 = i + 1; j2 < basis.size(); ++j2)
      defect = std::max(defect, std::abs(kernels::dot(basis[i], basis[j2])));
  est.ortho_defect = defect;
  return est;
}

}  // namespace curvlab
