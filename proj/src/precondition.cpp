#include "curvlab/precondition.hpp"

#include <cmath>
#include <stdexcept>

namespace curvlab {

DiagPreconditioner::DiagPreconditioner(std::vector<double> entries) : d(std::move(entries)) {
  if (d.empty()) throw std::invalid_argument("DiagPreconditioner: empty diagonal");
  for (double x : d)
    if (!(x > 0.0)) throw std::invalid_argument("DiagPreconditioner: entries must be positive");
}

SymmetricOperator precondition_operator(const SymmetricOperator& op,
                                        const DiagPreconditioner& p) {
  if (p.d.size() != op.dim)
    throw std::invalid_argument("precondition_operator: dim mismatch");
  std::vector<double> inv_sqrt(p.d.size());
  for (std::size_t i = 0; i < p.d.size(); ++i) inv_sqrt[i] = 1.0 / std::sqrt(p.d[i]);

  auto base = op.apply;
  const std::size_t n = op.dim;
  return SymmetricOperator{
      n, [base, inv_sqrt, n](const std::vector<double>& v) {
        if (v.size() != n) throw std::invalid_argument("preconditioned operator: dim mismatch");
        std::vector<double> scaled(n);
        for (std::size_t i = 0; i < n; ++i) scaled[i] = inv_sqrt[i] * v[i];
        std::vector<double> out = base(scaled);
        for (std::size_t i = 0; i < n; ++i) out[i] *= inv_sqrt[i];
        return out;
      }};
}

DiagPreconditioner adam_preconditioner(const AdamState& state, double eps) {
  if (state.t < 1)
    throw std::invalid_argument("adam_preconditioner: needs at least one completed step");
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  std::vector<double> d(state.v.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::sqrt(state.v[i] / bc2) + eps;
  return DiagPreconditioner(std::move(d));
}

DiagPreconditioner adam_preconditioner(const AdamState& state) {
  return adam_preconditioner(state, state.eps);
}

}  // namespace curvlab
