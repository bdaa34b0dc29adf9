// Diagonal preconditioning of symmetric operators. The Adam preconditioner
// D_ii = sqrt(bias-corrected second-moment EMA) + eps turns the raw Hessian
// into the similarity transform D^{-1/2} H D^{-1/2} whose top eigenvalue
// governs stability under Adam.

#pragma once

#include <vector>

#include "curvlab/operators.hpp"
#include "curvlab/optim.hpp"

namespace curvlab {

struct DiagPreconditioner {
  std::vector<double> d;  // strictly positive

  explicit DiagPreconditioner(std::vector<double> entries);
};

// v -> D^{-1/2} op(D^{-1/2} v); symmetric whenever op is.
SymmetricOperator precondition_operator(const SymmetricOperator& op, const DiagPreconditioner& p);

// Requires at least one completed Adam step (state.t >= 1). eps defaults to
// the state's own epsilon.
DiagPreconditioner adam_preconditioner(const AdamState& state, double eps);
DiagPreconditioner adam_preconditioner(const AdamState& state);

}  // namespace curvlab
