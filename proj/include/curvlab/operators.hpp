// Matrix-free symmetric linear maps. The Hessian and its preconditioned
// transform are only ever touched through this interface.

#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "curvlab/kernels.hpp"
#include "curvlab/rng.hpp"

namespace curvlab {

struct SymmetricOperator {
  std::size_t dim = 0;
  std::function<std::vector<double>(const std::vector<double>&)> apply;
};

// Wrap an explicit dense symmetric matrix (row-major, n x n).
SymmetricOperator dense_operator(const MatrixD& a);

// Wrap a diagonal matrix given by its entries.
SymmetricOperator diagonal_operator(const std::vector<double>& d);

// Largest relative defect |<u,Av> - <Au,v>| / (|<u,Av>| + |<Au,v>| + tiny)
// over `probes` random Gaussian pairs. Symmetric operators stay below 1e-8.
double symmetry_defect(const SymmetricOperator& op, SeededRng& rng, int probes = 8);

}  // namespace curvlab
