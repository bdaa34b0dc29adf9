#include "curvlab/model.hpp"

#include <cmath>
#include <stdexcept>

#include "curvlab/dual.hpp"
#include "curvlab/rng.hpp"

namespace curvlab {

void validate(const MlpConfig& config) {
  if (config.layer_widths.size() < 3)
    throw std::invalid_argument("MlpConfig: need at least one hidden layer");
  for (int w : config.layer_widths)
    if (w < 1 || w > 4096)
      throw std::invalid_argument("MlpConfig: widths must be in [1, 4096]");
  if (config.bn_eps <= 0.0) throw std::invalid_argument("MlpConfig: bn_eps must be positive");
}

const ParamSegment& ParamLayout::segment(const std::string& name) const {
  for (const auto& s : segments)
    if (s.name == name) return s;
  throw std::invalid_argument("ParamLayout: unknown segment " + name);
}

std::shared_ptr<const ParamLayout> mlp_layout(const MlpConfig& config) {
  validate(config);
  auto layout = std::make_shared<ParamLayout>();
  const std::size_t num_layers = config.layer_widths.size() - 1;
  std::size_t offset = 0;
  for (std::size_t l = 0; l < num_layers; ++l) {
    const auto out = static_cast<std::size_t>(config.layer_widths[l + 1]);
    const auto in = static_cast<std::size_t>(config.layer_widths[l]);
    const std::string prefix = "l" + std::to_string(l);
    layout->segments.push_back({prefix + ".W", offset, out, in});
    offset += out * in;
    layout->segments.push_back({prefix + ".b", offset, out, 1});
    offset += out;
    if (config.normalization == Normalization::kBatchNorm && l + 1 < num_layers) {
      layout->segments.push_back({prefix + ".gamma", offset, out, 1});
      offset += out;
      layout->segments.push_back({prefix + ".beta", offset, out, 1});
      offset += out;
    }
  }
  layout->total = offset;
  return layout;
}

ParamVector init_params(const MlpConfig& config, const InitSpec& spec) {
  if (spec.scale_alpha < 0.0)
    throw std::invalid_argument("InitSpec: scale_alpha must be nonnegative");
  auto layout = mlp_layout(config);
  std::vector<double> values(layout->total, 0.0);
  SeededRng rng(spec.seed);
  // Draw order is fixed (segments in layout order, row-major) and does not
  // depend on alpha, so two alphas with one seed differ by the exact factor.
  for (const auto& seg : layout->segments) {
    if (seg.name.ends_with(".W")) {
      const double stddev = 1.0 / std::sqrt(static_cast<double>(seg.cols));
      for (std::size_t i = 0; i < seg.size(); ++i)
        values[seg.offset + i] = spec.scale_alpha * (stddev * rng.normal());
    } else if (seg.name.ends_with(".gamma")) {
      for (std::size_t i = 0; i < seg.size(); ++i) values[seg.offset + i] = 1.0;
    }
    // biases and beta stay zero
  }
  return ParamVector{std::move(values), layout};
}

void update_running_stats(BnStats& running, const BnStats& batch, double momentum) {
  if (running.mean.empty()) {
    running = batch;
    return;
  }
  for (std::size_t l = 0; l < batch.mean.size(); ++l) {
    for (std::size_t j = 0; j < batch.mean[l].size(); ++j) {
      running.mean[l][j] = momentum * running.mean[l][j] + (1.0 - momentum) * batch.mean[l][j];
      running.var[l][j] = momentum * running.var[l][j] + (1.0 - momentum) * batch.var[l][j];
    }
  }
}

namespace {

template <typename T>
Matrix<T> segment_matrix(const std::vector<T>& flat, const ParamSegment& seg) {
  Matrix<T> m(seg.rows, seg.cols);
  for (std::size_t i = 0; i < seg.size(); ++i) m.data[i] = flat[seg.offset + i];
  return m;
}

template <typename T>
std::vector<T> segment_vector(const std::vector<T>& flat, const ParamSegment& seg) {
  return std::vector<T>(flat.begin() + static_cast<std::ptrdiff_t>(seg.offset),
                        flat.begin() + static_cast<std::ptrdiff_t>(seg.offset + seg.size()));
}

template <typename T>
Matrix<T> to_scalar(const MatrixD& m) {
  Matrix<T> out(m.rows, m.cols);
  for (std::size_t i = 0; i < m.data.size(); ++i) out.data[i] = T(m.data[i]);
  return out;
}

template <typename T>
T apply_act(Activation act, const T& x) {
  return act == Activation::kTanh ? tanh(x) : relu(x);
}

template <typename T>
T act_derivative_from_output(Activation act, const T& a) {
  if (act == Activation::kTanh) return T(1.0) - a * a;
  return a > T(0.0) ? T(1.0) : T(0.0);
}

template <typename T>
struct HiddenCache {
  Matrix<T> act_out;
  Matrix<T> xhat;          // batch norm only
  std::vector<T> inv_std;  // batch norm only
};

// Shared forward/backward engine. Instantiated with double for values and
// gradients, and with Dual for Hessian-vector products.
template <typename T>
struct Engine {
  const MlpConfig& config;
  std::size_t num_layers;

  explicit Engine(const MlpConfig& c) : config(c), num_layers(c.layer_widths.size() - 1) {}

  bool bn_on(std::size_t layer) const {
    return config.normalization == Normalization::kBatchNorm && layer + 1 < num_layers;
  }

  // Training-mode batch norm; caches normalized values and inverse stddev.
  Matrix<T> bn_forward(const Matrix<T>& z, const std::vector<T>& gamma,
                       const std::vector<T>& beta, HiddenCache<T>& cache,
                       std::vector<T>* mean_out, std::vector<T>* var_out) const {
    const std::size_t b = z.rows, d = z.cols;
    const T inv_b = T(1.0 / static_cast<double>(b));
    std::vector<T> mu(d, T(0.0)), var(d, T(0.0));
    for (std::size_t j = 0; j < d; ++j) {
      T acc{};
      for (std::size_t i = 0; i < b; ++i) acc += z(i, j);
      mu[j] = acc * inv_b;
    }
    for (std::size_t j = 0; j < d; ++j) {
      T acc{};
      for (std::size_t i = 0; i < b; ++i) {
        const T dev = z(i, j) - mu[j];
        acc += dev * dev;
      }
      var[j] = acc * inv_b;
    }
    cache.inv_std.resize(d);
    for (std::size_t j = 0; j < d; ++j)
      cache.inv_std[j] = T(1.0) / sqrt(var[j] + T(config.bn_eps));

    cache.xhat = Matrix<T>(b, d);
    Matrix<T> y(b, d);
    for (std::size_t i = 0; i < b; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        const T xh = (z(i, j) - mu[j]) * cache.inv_std[j];
        cache.xhat(i, j) = xh;
        y(i, j) = gamma[j] * xh + beta[j];
      }
    }
    if (mean_out) *mean_out = mu;
    if (var_out) *var_out = var;
    return y;
  }

  Matrix<T> bn_backward(const Matrix<T>& g_y, const HiddenCache<T>& cache,
                        const std::vector<T>& gamma, std::vector<T>& dgamma,
                        std::vector<T>& dbeta) const {
    const std::size_t b = g_y.rows, d = g_y.cols;
    const T inv_b = T(1.0 / static_cast<double>(b));
    dgamma.assign(d, T(0.0));
    dbeta.assign(d, T(0.0));
    std::vector<T> mean_gx(d, T(0.0)), mean_gx_xhat(d, T(0.0));
    for (std::size_t j = 0; j < d; ++j) {
      T m1{}, m2{}, dg{}, db{};
      for (std::size_t i = 0; i < b; ++i) {
        const T gy = g_y(i, j);
        const T gx = gy * gamma[j];
        m1 += gx;
        m2 += gx * cache.xhat(i, j);
        dg += gy * cache.xhat(i, j);
        db += gy;
      }
      mean_gx[j] = m1 * inv_b;
      mean_gx_xhat[j] = m2 * inv_b;
      dgamma[j] = dg;
      dbeta[j] = db;
    }
    Matrix<T> g_z(b, d);
    for (std::size_t i = 0; i < b; ++i)
      for (std::size_t j = 0; j < d; ++j)
        g_z(i, j) = cache.inv_std[j] * (g_y(i, j) * gamma[j] - mean_gx[j] -
                                        cache.xhat(i, j) * mean_gx_xhat[j]);
    return g_z;
  }

  // Returns the mean batch loss; fills grad (same layout) when non-null.
  T loss_and_grad(const std::vector<T>& flat, const ParamLayout& layout, const Batch& batch,
                  std::vector<T>* grad_out, BnStats* stats_out) const {
    const std::size_t b = batch.inputs.rows;
    if (b == 0) throw std::invalid_argument("loss: empty batch");
    const T inv_b = T(1.0 / static_cast<double>(b));

    std::vector<Matrix<T>> weights(num_layers);
    std::vector<std::vector<T>> biases(num_layers), gammas(num_layers), betas(num_layers);
    for (std::size_t l = 0; l < num_layers; ++l) {
      const std::string prefix = "l" + std::to_string(l);
      weights[l] = segment_matrix(flat, layout.segment(prefix + ".W"));
      biases[l] = segment_vector(flat, layout.segment(prefix + ".b"));
      if (bn_on(l)) {
        gammas[l] = segment_vector(flat, layout.segment(prefix + ".gamma"));
        betas[l] = segment_vector(flat, layout.segment(prefix + ".beta"));
      }
    }

    if (stats_out) {
      stats_out->mean.clear();
      stats_out->var.clear();
    }

    // Forward.
    std::vector<Matrix<T>> acts(num_layers);  // acts[l] = input to layer l
    acts[0] = to_scalar<T>(batch.inputs);
    std::vector<HiddenCache<T>> caches(num_layers);
    Matrix<T> cur;
    for (std::size_t l = 0; l < num_layers; ++l) {
      const Matrix<T>& x = l == 0 ? acts[0] : caches[l - 1].act_out;
      kernels::matmul_nt(x, weights[l], cur);
      kernels::add_row_vector(cur, biases[l]);
      if (l + 1 == num_layers) break;  // logits
      if (bn_on(l)) {
        std::vector<T> mu, var;
        cur = bn_forward(cur, gammas[l], betas[l], caches[l],
                         stats_out ? &mu : nullptr, stats_out ? &var : nullptr);
        if (stats_out) {
          std::vector<double> m(mu.size()), v(var.size());
          for (std::size_t j = 0; j < mu.size(); ++j) {
            m[j] = value_of(mu[j]);
            v[j] = value_of(var[j]);
          }
          stats_out->mean.push_back(std::move(m));
          stats_out->var.push_back(std::move(v));
        }
      }
      caches[l].act_out = cur;
      kernels::map_inplace(caches[l].act_out,
                           [&](const T& v) { return apply_act(config.activation, v); });
    }
    Matrix<T>& logits = cur;
    const std::size_t classes = logits.cols;

    // Loss and the logits gradient.
    T loss{};
    Matrix<T> delta(b, classes);
    if (config.loss == LossKind::kSoftmaxCrossEntropy) {
      if (batch.labels.size() != b)
        throw std::invalid_argument("loss: labels required for cross entropy");
      for (std::size_t i = 0; i < b; ++i) {
        const int label = batch.labels[i];
        if (label < 0 || static_cast<std::size_t>(label) >= classes)
          throw std::invalid_argument("loss: label out of range");
        T row_max = logits(i, 0);
        for (std::size_t j = 1; j < classes; ++j)
          if (logits(i, j) > row_max) row_max = logits(i, j);
        T sum_exp{};
        for (std::size_t j = 0; j < classes; ++j) sum_exp += exp(logits(i, j) - row_max);
        const T lse = row_max + log(sum_exp);
        loss += (lse - logits(i, static_cast<std::size_t>(label))) * inv_b;
        for (std::size_t j = 0; j < classes; ++j) {
          T p = exp(logits(i, j) - lse);
          if (j == static_cast<std::size_t>(label)) p = p - T(1.0);
          delta(i, j) = p * inv_b;
        }
      }
    } else {
      Matrix<T> targets;
      if (batch.targets.rows > 0) {
        if (batch.targets.rows != b || batch.targets.cols != classes)
          throw std::invalid_argument("loss: target shape mismatch");
        targets = to_scalar<T>(batch.targets);
      } else {
        if (batch.labels.size() != b)
          throw std::invalid_argument("loss: labels or targets required for mse");
        targets = Matrix<T>(b, classes);
        for (std::size_t i = 0; i < b; ++i) {
          const int label = batch.labels[i];
          if (label < 0 || static_cast<std::size_t>(label) >= classes)
            throw std::invalid_argument("loss: label out of range");
          targets(i, static_cast<std::size_t>(label)) = T(1.0);
        }
      }
      const T half(0.5);
      for (std::size_t i = 0; i < b; ++i) {
        for (std::size_t j = 0; j < classes; ++j) {
          const T err = logits(i, j) - targets(i, j);
          loss += half * err * err * inv_b;
          delta(i, j) = err * inv_b;
        }
      }
    }

    if (grad_out == nullptr) return loss;

    // Backward.
    grad_out->assign(layout.total, T(0.0));
    auto write_segment = [&](const std::string& name, const Matrix<T>& m) {
      const ParamSegment& seg = layout.segment(name);
      for (std::size_t i = 0; i < seg.size(); ++i) (*grad_out)[seg.offset + i] = m.data[i];
    };
    auto write_segment_vec = [&](const std::string& name, const std::vector<T>& v) {
      const ParamSegment& seg = layout.segment(name);
      for (std::size_t i = 0; i < seg.size(); ++i) (*grad_out)[seg.offset + i] = v[i];
    };

    Matrix<T> d_cur = std::move(delta);
    for (std::size_t lp1 = num_layers; lp1 >= 1; --lp1) {
      const std::size_t l = lp1 - 1;
      const std::string prefix = "l" + std::to_string(l);
      const Matrix<T>& x = l == 0 ? acts[0] : caches[l - 1].act_out;
      Matrix<T> dw;
      kernels::matmul_tn(d_cur, x, dw);
      write_segment(prefix + ".W", dw);
      write_segment_vec(prefix + ".b", kernels::col_sums(d_cur));
      if (l == 0) break;

      Matrix<T> g_act;
      kernels::matmul_nn(d_cur, weights[l], g_act);
      // Through the activation of hidden layer l-1.
      const Matrix<T>& a = caches[l - 1].act_out;
      for (std::size_t i = 0; i < g_act.data.size(); ++i)
        g_act.data[i] *= act_derivative_from_output(config.activation, a.data[i]);
      if (bn_on(l - 1)) {
        std::vector<T> dgamma, dbeta;
        d_cur = bn_backward(g_act, caches[l - 1], gammas[l - 1], dgamma, dbeta);
        const std::string bn_prefix = "l" + std::to_string(l - 1);
        write_segment_vec(bn_prefix + ".gamma", dgamma);
        write_segment_vec(bn_prefix + ".beta", dbeta);
      } else {
        d_cur = std::move(g_act);
      }
    }
    return loss;
  }
};

void check_layout(const ParamVector& params, const MlpConfig& config) {
  if (!params.layout) throw std::invalid_argument("ParamVector: missing layout");
  if (params.values.size() != params.layout->total)
    throw std::invalid_argument("ParamVector: values do not match layout");
  auto expect = mlp_layout(config);
  if (expect->total != params.layout->total)
    throw std::invalid_argument("ParamVector: layout does not match config");
}

}  // namespace

LossGrad loss_and_grad(const ParamVector& params, const Batch& batch, const MlpConfig& config,
                       BnStats* batch_stats) {
  check_layout(params, config);
  Engine<double> engine(config);
  std::vector<double> grad;
  const double loss =
      engine.loss_and_grad(params.values, *params.layout, batch, &grad, batch_stats);
  return LossGrad{loss, ParamVector{std::move(grad), params.layout}};
}

double mlp_loss(const ParamVector& params, const Batch& batch, const MlpConfig& config) {
  check_layout(params, config);
  Engine<double> engine(config);
  return engine.loss_and_grad(params.values, *params.layout, batch, nullptr, nullptr);
}

ParamVector hvp(const ParamVector& params, const Batch& batch, const MlpConfig& config,
                const ParamVector& v) {
  check_layout(params, config);
  if (v.values.size() != params.values.size())
    throw std::invalid_argument("hvp: direction layout mismatch");
  std::vector<Dual> flat(params.values.size());
  for (std::size_t i = 0; i < flat.size(); ++i)
    flat[i] = Dual{params.values[i], v.values[i]};
  Engine<Dual> engine(config);
  std::vector<Dual> grad;
  engine.loss_and_grad(flat, *params.layout, batch, &grad, nullptr);
  std::vector<double> out(grad.size());
  for (std::size_t i = 0; i < grad.size(); ++i) out[i] = grad[i].t;
  return ParamVector{std::move(out), params.layout};
}

SymmetricOperator hessian_operator(const ParamVector& params, const Batch& batch,
                                   const MlpConfig& config) {
  check_layout(params, config);
  const ParamVector frozen = params;
  const Batch frozen_batch = batch;
  const MlpConfig cfg = config;
  return SymmetricOperator{
      params.values.size(), [frozen, frozen_batch, cfg](const std::vector<double>& v) {
        ParamVector dir{v, frozen.layout};
        return hvp(frozen, frozen_batch, cfg, dir).values;
      }};
}

double gradient_quotient(const ParamVector& params, const Batch& batch, const MlpConfig& config,
                         double eps) {
  if (eps <= 0.0) throw std::invalid_argument("gradient_quotient: eps must be positive");
  const LossGrad lg = loss_and_grad(params, batch, config);
  const ParamVector hg = hvp(params, batch, config, lg.grad);
  double acc = 0.0;
  for (std::size_t i = 0; i < hg.values.size(); ++i)
    acc += std::abs(hg.values[i]) / (std::abs(lg.grad.values[i]) + eps);
  return acc / static_cast<double>(hg.values.size());
}

double accuracy(const ParamVector& params, const MatrixD& inputs, const std::vector<int>& labels,
                const MlpConfig& config, const BnStats* running) {
  check_layout(params, config);
  if (inputs.rows != labels.size() || inputs.rows == 0)
    throw std::invalid_argument("accuracy: inputs/labels mismatch");
  const std::size_t num_layers = config.layer_widths.size() - 1;
  const ParamLayout& layout = *params.layout;

  MatrixD x = inputs;
  MatrixD cur;
  std::size_t bn_index = 0;
  for (std::size_t l = 0; l < num_layers; ++l) {
    const std::string prefix = "l" + std::to_string(l);
    const MatrixD w = segment_matrix(params.values, layout.segment(prefix + ".W"));
    const std::vector<double> bias = segment_vector(params.values, layout.segment(prefix + ".b"));
    kernels::matmul_nt(x, w, cur);
    kernels::add_row_vector(cur, bias);
    if (l + 1 == num_layers) break;
    if (config.normalization == Normalization::kBatchNorm) {
      const std::vector<double> gamma =
          segment_vector(params.values, layout.segment(prefix + ".gamma"));
      const std::vector<double> beta =
          segment_vector(params.values, layout.segment(prefix + ".beta"));
      std::vector<double> mu(cur.cols, 0.0), var(cur.cols, 0.0);
      if (running != nullptr && bn_index < running->mean.size()) {
        mu = running->mean[bn_index];
        var = running->var[bn_index];
      } else {
        const double inv_b = 1.0 / static_cast<double>(cur.rows);
        for (std::size_t j = 0; j < cur.cols; ++j) {
          double acc = 0.0;
          for (std::size_t i = 0; i < cur.rows; ++i) acc += cur(i, j);
          mu[j] = acc * inv_b;
          double acc2 = 0.0;
          for (std::size_t i = 0; i < cur.rows; ++i) {
            const double dev = cur(i, j) - mu[j];
            acc2 += dev * dev;
          }
          var[j] = acc2 * inv_b;
        }
      }
      for (std::size_t j = 0; j < cur.cols; ++j) {
        const double inv_std = 1.0 / std::sqrt(var[j] + config.bn_eps);
        for (std::size_t i = 0; i < cur.rows; ++i)
          cur(i, j) = gamma[j] * (cur(i, j) - mu[j]) * inv_std + beta[j];
      }
      ++bn_index;
    }
    kernels::map_inplace(cur, [&](double v) {
      return config.activation == Activation::kTanh ? std::tanh(v) : relu(v);
    });
    x = cur;
  }

  std::size_t correct = 0;
  for (std::size_t i = 0; i < cur.rows; ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < cur.cols; ++j)
      if (cur(i, j) > cur(i, best)) best = j;  // ties keep the lowest index
    if (static_cast<int>(best) == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(cur.rows);
}

double QuadraticModel::loss(const std::vector<double>& theta) const {
  const std::vector<double> h_theta = grad(theta);
  return 0.5 * kernels::dot(theta, h_theta);
}

std::vector<double> QuadraticModel::grad(const std::vector<double>& theta) const {
  return hvp(theta);
}

std::vector<double> QuadraticModel::hvp(const std::vector<double>& v) const {
  if (v.size() != dim()) throw std::invalid_argument("QuadraticModel: dim mismatch");
  if (h_dense.rows > 0) {
    std::vector<double> out(dim(), 0.0);
    for (std::size_t i = 0; i < h_dense.rows; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < h_dense.cols; ++j) acc += h_dense(i, j) * v[j];
      out[i] = acc;
    }
    return out;
  }
  std::vector<double> out(dim());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = h_diag[i] * v[i];
  return out;
}

SymmetricOperator QuadraticModel::hessian_operator() const {
  const QuadraticModel copy = *this;
  return SymmetricOperator{dim(), [copy](const std::vector<double>& v) { return copy.hvp(v); }};
}

std::shared_ptr<const ParamLayout> quadratic_layout(std::size_t dim) {
  auto layout = std::make_shared<ParamLayout>();
  layout->segments.push_back({"theta", 0, dim, 1});
  layout->total = dim;
  return layout;
}

}  // namespace curvlab
