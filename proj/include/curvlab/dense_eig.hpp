// Dense symmetric eigensolver: Householder tridiagonalization followed by
// implicit-shift QL. Exists as the test oracle for the Lanczos path and for
// small explicit quadratic problems; intended for dims up to ~2048.

#pragma once

#include <vector>

#include "curvlab/kernels.hpp"

namespace curvlab {

// Eigenvalues in ascending order. Throws std::invalid_argument when the
// input is not square or its relative asymmetry exceeds 1e-8.
std::vector<double> dense_sym_eigs(const MatrixD& a);

struct DenseEigFull {
  std::vector<double> eigenvalues;  // ascending
  MatrixD eigenvectors;             // column j pairs with eigenvalues[j]
};

// Same solver with eigenvector accumulation (slower; used where the
// reconstruction A = Q diag(w) Q^T is needed).
DenseEigFull dense_sym_eigs_full(const MatrixD& a);

// max_ij |a_ij - a_ji| / max_ij |a_ij|
double relative_asymmetry(const MatrixD& a);

}  // namespace curvlab
