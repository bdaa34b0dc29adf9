// Small differentiable models: an MLP classifier (optional batch norm) and
// the explicit quadratic loss. Gradients come from a hand-written reverse
// pass; Hessian-vector products run the same pass in forward-mode dual
// arithmetic, which is exactly the double-differentiation trick.

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "curvlab/kernels.hpp"
#include "curvlab/operators.hpp"

namespace curvlab {

enum class Activation { kRelu, kTanh };
enum class Normalization { kNone, kBatchNorm };
enum class LossKind { kSoftmaxCrossEntropy, kMse };

struct MlpConfig {
  std::vector<int> layer_widths;  // input, hidden..., classes
  Activation activation = Activation::kTanh;
  Normalization normalization = Normalization::kNone;
  LossKind loss = LossKind::kSoftmaxCrossEntropy;
  double bn_eps = 1e-5;
};

// Throws std::invalid_argument unless there is at least one hidden layer and
// every width is in [1, 4096].
void validate(const MlpConfig& config);

struct InitSpec {
  // scheme: LeCun normal. Weights ~ scale_alpha * N(0, 1/fan_in), biases 0,
  // batch-norm gamma 1 and beta 0.
  double scale_alpha = 1.0;
  std::uint64_t seed = 0;
};

struct Batch {
  MatrixD inputs;           // batch_size x input_dim
  std::vector<int> labels;  // class indices
  MatrixD targets;          // optional regression targets; empty -> one-hot of labels
};

struct ParamSegment {
  std::string name;
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t size() const { return rows * cols; }
};

struct ParamLayout {
  std::vector<ParamSegment> segments;
  std::size_t total = 0;

  const ParamSegment& segment(const std::string& name) const;
};

struct ParamVector {
  std::vector<double> values;
  std::shared_ptr<const ParamLayout> layout;
};

std::shared_ptr<const ParamLayout> mlp_layout(const MlpConfig& config);

ParamVector init_params(const MlpConfig& config, const InitSpec& spec);

// Per-feature batch statistics of every batch-norm layer, exported by
// loss_and_grad so the training loop can maintain running statistics.
struct BnStats {
  std::vector<std::vector<double>> mean;
  std::vector<std::vector<double>> var;
};

void update_running_stats(BnStats& running, const BnStats& batch, double momentum);

struct LossGrad {
  double loss = 0.0;
  ParamVector grad;
};

// Mean loss over the batch and its gradient. A non-finite forward pass
// surfaces as a non-finite loss value, never as an exception.
LossGrad loss_and_grad(const ParamVector& params, const Batch& batch, const MlpConfig& config,
                       BnStats* batch_stats = nullptr);

// Forward pass only (finite-difference oracles and eval paths).
double mlp_loss(const ParamVector& params, const Batch& batch, const MlpConfig& config);

// H v at (params, batch) via forward-mode differentiation of the gradient.
ParamVector hvp(const ParamVector& params, const Batch& batch, const MlpConfig& config,
                const ParamVector& v);

// Hessian of the batch loss at frozen (params, batch). Batch norm runs in
// training mode on that batch, keeping the map deterministic and symmetric.
SymmetricOperator hessian_operator(const ParamVector& params, const Batch& batch,
                                   const MlpConfig& config);

// mean_i |(Hg)_i| / (|g_i| + eps): curvature-conditioning diagnostic.
double gradient_quotient(const ParamVector& params, const Batch& batch, const MlpConfig& config,
                         double eps = 1e-5);

// Fraction of argmax-correct predictions; ties resolve to the lowest class
// index. With batch norm, `running` supplies eval-mode statistics (falls back
// to the statistics of `inputs` itself when null).
double accuracy(const ParamVector& params, const MatrixD& inputs, const std::vector<int>& labels,
                const MlpConfig& config, const BnStats* running = nullptr);

// L(theta) = 1/2 theta^T H theta with H given densely or by its diagonal.
struct QuadraticModel {
  MatrixD h_dense;             // used when rows > 0
  std::vector<double> h_diag;  // otherwise

  std::size_t dim() const { return h_dense.rows > 0 ? h_dense.rows : h_diag.size(); }
  double loss(const std::vector<double>& theta) const;
  std::vector<double> grad(const std::vector<double>& theta) const;
  std::vector<double> hvp(const std::vector<double>& v) const;
  SymmetricOperator hessian_operator() const;
};

std::shared_ptr<const ParamLayout> quadratic_layout(std::size_t dim);

}  // namespace curvlab
