// Lanczos top-eigenvalue estimation on matrix-free symmetric operators.
// Basis vectors are kept in float64 and reorthogonalized against the whole
// basis at every step (toggleable, on by default).

#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "curvlab/operators.hpp"
#include "curvlab/tridiagonal.hpp"

namespace curvlab {

struct LanczosConfig {
  // 40 covers the image-style models here; sequence-style setups use 45 and
  // slow-converging spectra up to 200.
  int num_iters = 40;
  bool reorthogonalize = true;
  std::uint64_t seed = 0;
};

struct SpectrumEstimate {
  double lambda_max = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> ritz_values;  // ascending
  // ||A v - lambda v|| for the top Ritz pair via the beta * |y_k| identity.
  double residual = std::numeric_limits<double>::quiet_NaN();
  int iters_run = 0;
  // max_{i != j} |<q_i, q_j>| over the stored basis.
  double ortho_defect = 0.0;
  // Set when the operator produced a non-finite value; holds the 1-based
  // iteration at which it happened. lambda_max is NaN in that case.
  std::optional<int> failed_at;

  bool ok() const { return !failed_at.has_value(); }
};

// Starting vector: normalized i.i.d. standard normal drawn from config.seed.
// Stops early when the residual norm beta drops below 1e-12 (invariant
// subspace found). Deterministic for a fixed (operator, config).
SpectrumEstimate lanczos_max_eig(const SymmetricOperator& op, const LanczosConfig& config);

}  // namespace curvlab
