// SGD with (Nesterov) momentum, Adam with bias correction, and global-norm
// gradient clipping. Optimizer state is owned by a single run; steps are
// deterministic and layout-preserving.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace curvlab {

struct SgdMomentumState {
  std::vector<double> velocity;
  double beta = 0.9;
  bool nesterov = true;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;  // elementwise >= 0
  long long t = 0;        // completed steps
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct ClipConfig {
  std::optional<double> max_global_norm;  // disengaged when empty
};

SgdMomentumState make_sgd_state(std::size_t dim, double beta, bool nesterov);
AdamState make_adam_state(std::size_t dim, double beta1 = 0.9, double beta2 = 0.999,
                          double eps = 1e-8);

// Heavy-ball: vel' = beta vel + g; params -= eta vel'.
// Nesterov:   same velocity update; params -= eta (g + beta vel').
void sgd_step(SgdMomentumState& state, std::vector<double>& params,
              const std::vector<double>& grad, double eta);

void adam_step(AdamState& state, std::vector<double>& params, const std::vector<double>& grad,
               double eta);

// Scales g down to the configured global L2 norm; identity when within it.
std::vector<double> clip_gradient(std::vector<double> g, const ClipConfig& clip);

}  // namespace curvlab
