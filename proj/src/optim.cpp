#include "curvlab/optim.hpp"

#include <cmath>
#include <stdexcept>

#include "curvlab/kernels.hpp"

namespace curvlab {

SgdMomentumState make_sgd_state(std::size_t dim, double beta, bool nesterov) {
  return SgdMomentumState{std::vector<double>(dim, 0.0), beta, nesterov};
}

AdamState make_adam_state(std::size_t dim, double beta1, double beta2, double eps) {
  AdamState s;
  s.m.assign(dim, 0.0);
  s.v.assign(dim, 0.0);
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.eps = eps;
  return s;
}

void sgd_step(SgdMomentumState& state, std::vector<double>& params,
              const std::vector<double>& grad, double eta) {
  if (state.velocity.size() != params.size() || grad.size() != params.size())
    throw std::invalid_argument("sgd_step: layout mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double vel = state.beta * state.velocity[i] + grad[i];
    state.velocity[i] = vel;
    params[i] -= eta * (state.nesterov ? grad[i] + state.beta * vel : vel);
  }
}

void adam_step(AdamState& state, std::vector<double>& params, const std::vector<double>& grad,
               double eta) {
  if (state.m.size() != params.size() || grad.size() != params.size())
    throw std::invalid_argument("adam_step: layout mismatch");
  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grad[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params[i] -= eta * m_hat / (std::sqrt(v_hat) + state.eps);
  }
}

std::vector<double> clip_gradient(std::vector<double> g, const ClipConfig& clip) {
  if (!clip.max_global_norm.has_value()) return g;
  const double max_norm = *clip.max_global_norm;
  const double norm = global_l2_norm(g);
  if (norm > max_norm) {
    const double s = max_norm / norm;
    for (double& x : g) x *= s;
  }
  return g;
}

}  // namespace curvlab
