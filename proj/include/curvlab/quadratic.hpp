// Exact dynamics on quadratic losses L = 1/2 theta^T H theta under
// (preconditioned) gradient descent and heavy-ball momentum. This is the
// analytic backbone validating the 2/eta criterion: plain GD on a PSD
// quadratic diverges exactly when eta * lambda_max > 2.

#pragma once

#include <optional>
#include <vector>

#include "curvlab/kernels.hpp"
#include "curvlab/precondition.hpp"

namespace curvlab {

struct QuadraticProblem {
  // H, either dense (dim <= 512, symmetry/PSD checked at construction) or as
  // a diagonal spectrum for larger synthetic scans.
  MatrixD h_dense;
  std::vector<double> h_diag;
  std::optional<DiagPreconditioner> d;
  std::vector<double> theta0;

  std::size_t dim() const { return theta0.size(); }

  static QuadraticProblem dense(MatrixD h, std::vector<double> theta0,
                                std::optional<DiagPreconditioner> d = {});
  static QuadraticProblem diagonal(std::vector<double> spectrum, std::vector<double> theta0,
                                   std::optional<DiagPreconditioner> d = {});
};

// Eigenvalues of D^-1 H (= eigenvalues of the similar symmetric form
// D^-1/2 H D^-1/2), ascending.
std::vector<double> preconditioned_spectrum(const QuadraticProblem& p);

struct DynamicsResult {
  std::vector<double> norms;          // ||theta_t||, t = 0..steps
  bool diverged = false;              // decided from the trajectory
  std::vector<double> amplification;  // per-eigenmode |1 - eta lambda_i|
};

// theta_t = (I - eta D^-1 H) theta_{t-1}. Overflow clamps and flags
// divergence; otherwise divergence is sustained growth of ||theta|| against
// its running minimum.
DynamicsResult gd_simulate(const QuadraticProblem& p, double eta, long long steps);

enum class StabilityClass { kStable, kMarginal, kUnstable };

const char* to_string(StabilityClass c);

// rho = max_i |1 - eta lambda_i(D^-1 H)|: stable rho < 1, marginal within
// 1e-12 of 1, unstable rho > 1. For PSD H with D = I this is eta lambda_max
// vs 2.
StabilityClass stability_predicate(const QuadraticProblem& p, double eta);

// Heavy-ball on the (preconditioned) quadratic; beta = 0 reproduces
// gd_simulate exactly. Divergence is geometric growth of the combined
// (theta, velocity) norm sustained over a 50-step window.
DynamicsResult momentum_simulate(const QuadraticProblem& p, double eta, double beta,
                                 long long steps);

// Largest eta in the ascending grid for which momentum_simulate reports no
// divergence (marginal oscillation counts as non-divergent).
std::optional<double> empirical_threshold_scan(const QuadraticProblem& p,
                                               const std::vector<double>& etas, double beta,
                                               long long steps = 1000);

}  // namespace curvlab
