// Symmetric tridiagonal matrices (the Lanczos intermediate) and their
// eigenvalues via Sturm-count bisection.

#pragma once

#include <utility>
#include <vector>

namespace curvlab {

struct TriDiagonal {
  std::vector<double> diagonal;      // alpha_1 .. alpha_k
  std::vector<double> off_diagonal;  // beta_1 .. beta_{k-1}
};

// Throws std::invalid_argument unless off_diagonal is one shorter than
// diagonal and diagonal is nonempty.
void validate(const TriDiagonal& t);

// [min, max] Gershgorin disc bounds.
std::pair<double, double> gershgorin_bounds(const TriDiagonal& t);

// Number of eigenvalues strictly below x (Sturm count).
int sturm_count_below(const TriDiagonal& t, double x);

// Largest eigenvalue, bisection to machine precision.
double tridiag_max_eig(const TriDiagonal& t);

// All k eigenvalues, ascending.
std::vector<double> tridiag_eigs(const TriDiagonal& t);

// Eigenvector for an isolated eigenvalue lambda (inverse iteration). Used for
// Ritz residual estimates.
std::vector<double> tridiag_eigenvector(const TriDiagonal& t, double lambda);

}  // namespace curvlab
