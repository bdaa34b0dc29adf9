#include "curvlab/config.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace curvlab {

namespace {

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string fmt_double_list(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += fmt_double(xs[i]);
  }
  return out;
}

std::string fmt_int_list(const std::vector<long long>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(xs[i]);
  }
  return out;
}

std::string fmt_width_list(const std::vector<int>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(xs[i]);
  }
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

class KeyValues {
 public:
  explicit KeyValues(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::string str(const std::string& key, const std::string& fallback) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
  }

  double num(const std::string& key, double fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size())
      throw std::invalid_argument("config: bad number for " + key + ": " + it->second);
    return v;
  }

  long long integer(const std::string& key, long long fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    return std::stoll(it->second);
  }

  std::uint64_t uinteger(const std::string& key, std::uint64_t fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    return std::stoull(it->second);
  }

  bool boolean(const std::string& key, bool fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    if (it->second == "true") return true;
    if (it->second == "false") return false;
    throw std::invalid_argument("config: bad bool for " + key + ": " + it->second);
  }

 private:
  std::map<std::string, std::string> kv_;
};

std::vector<double> parse_double_list(const std::string& s) {
  if (s.rfind("logspace:", 0) == 0) {
    double lo = 0, hi = 0;
    int n = 0;
    if (std::sscanf(s.c_str(), "logspace:%lf:%lf:%d", &lo, &hi, &n) != 3)
      throw std::invalid_argument("config: bad logspace spec " + s);
    return logspace_grid(lo, hi, n);
  }
  std::vector<double> out;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  return out;
}

std::vector<long long> parse_int_list(const std::string& s) {
  if (s.rfind("pow2:", 0) == 0) {
    long long lo = 0, hi = 0;
    if (std::sscanf(s.c_str(), "pow2:%lld:%lld", &lo, &hi) != 2)
      throw std::invalid_argument("config: bad pow2 spec " + s);
    return pow2_grid(lo, hi);
  }
  std::vector<long long> out;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(std::stoll(tok));
  }
  return out;
}

std::vector<int> parse_width_list(const std::string& s) {
  std::vector<int> out;
  for (long long v : parse_int_list(s)) out.push_back(static_cast<int>(v));
  return out;
}

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                  " is not key = value: " + stripped);
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("config: empty key on line " +
                                                 std::to_string(line_no));
    kv[key] = value;
  }
  return kv;
}

std::vector<double> logspace_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2)
    throw std::invalid_argument("logspace_grid: need 0 < lo < hi and n >= 2");
  std::vector<double> out(static_cast<std::size_t>(n));
  const double llo = std::log10(lo), lhi = std::log10(hi);
  for (int i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] =
        std::pow(10.0, llo + (lhi - llo) * static_cast<double>(i) / static_cast<double>(n - 1));
  return out;
}

std::vector<long long> pow2_grid(long long lo, long long hi) {
  if (lo < 1 || hi < lo) throw std::invalid_argument("pow2_grid: need 1 <= lo <= hi");
  std::vector<long long> out;
  for (long long v = lo; v <= hi; v *= 2) out.push_back(v);
  return out;
}

void validate(const RunConfig& config) {
  if (config.model_kind == ModelKind::kMlp) {
    validate(config.model);
  } else {
    if (config.quad.spectrum.empty())
      throw std::invalid_argument("RunConfig: quadratic run needs quad.spectrum");
    for (double lam : config.quad.spectrum)
      if (lam < 0.0) throw std::invalid_argument("RunConfig: quad spectrum must be PSD");
  }
  if (config.batch_size < 1) throw std::invalid_argument("RunConfig: batch_size must be >= 1");
  if (config.total_steps < 0) throw std::invalid_argument("RunConfig: total_steps must be >= 0");
  if (config.curvature_cadence < 1)
    throw std::invalid_argument("RunConfig: curvature_cadence must be >= 1");
  if (config.probe_batch_size < 1)
    throw std::invalid_argument("RunConfig: probe_batch_size must be >= 1");
  if (config.lanczos.num_iters < 1)
    throw std::invalid_argument("RunConfig: lanczos.num_iters must be >= 1");
  if (config.clip.max_global_norm.has_value() && !(*config.clip.max_global_norm > 0.0))
    throw std::invalid_argument("RunConfig: clip.max_global_norm must be positive");
}

std::string serialize_run_config(const RunConfig& c) {
  std::ostringstream out;
  out << "model.kind = " << (c.model_kind == ModelKind::kMlp ? "mlp" : "quadratic") << '\n';
  out << "model.widths = " << fmt_width_list(c.model.layer_widths) << '\n';
  out << "model.activation = " << (c.model.activation == Activation::kTanh ? "tanh" : "relu")
      << '\n';
  out << "model.normalization = "
      << (c.model.normalization == Normalization::kBatchNorm ? "batch_norm" : "none") << '\n';
  out << "model.loss = "
      << (c.model.loss == LossKind::kSoftmaxCrossEntropy ? "softmax_cross_entropy" : "mse")
      << '\n';
  out << "model.bn_eps = " << fmt_double(c.model.bn_eps) << '\n';
  out << "quad.spectrum = " << fmt_double_list(c.quad.spectrum) << '\n';
  out << "quad.theta0 = " << fmt_double_list(c.quad.theta0) << '\n';
  out << "quad.seed = " << c.quad.seed << '\n';
  out << "init.alpha = " << fmt_double(c.init.scale_alpha) << '\n';
  out << "init.seed = " << c.init.seed << '\n';
  const char* source = c.dataset.source == DataSource::kTwoGaussians ? "two_gaussians"
                       : c.dataset.source == DataSource::kSpirals    ? "spirals"
                                                                     : "idx_files";
  out << "dataset.source = " << source << '\n';
  out << "dataset.n = " << c.dataset.n << '\n';
  out << "dataset.dim = " << c.dataset.dim << '\n';
  out << "dataset.separation = " << fmt_double(c.dataset.separation) << '\n';
  out << "dataset.turns = " << fmt_double(c.dataset.turns) << '\n';
  out << "dataset.noise = " << fmt_double(c.dataset.noise) << '\n';
  out << "dataset.images_path = " << c.dataset.images_path << '\n';
  out << "dataset.labels_path = " << c.dataset.labels_path << '\n';
  out << "dataset.idx_normalize = " << (c.dataset.idx_normalize ? "true" : "false") << '\n';
  out << "dataset.train_fraction = " << fmt_double(c.dataset.train_fraction) << '\n';
  out << "dataset.seed = " << c.dataset.seed << '\n';
  out << "optimizer.kind = "
      << (c.optimizer == OptimizerKind::kSgdMomentum ? "sgd_momentum" : "adam") << '\n';
  out << "optimizer.beta = " << fmt_double(c.sgd_beta) << '\n';
  out << "optimizer.nesterov = " << (c.sgd_nesterov ? "true" : "false") << '\n';
  out << "optimizer.beta1 = " << fmt_double(c.adam_beta1) << '\n';
  out << "optimizer.beta2 = " << fmt_double(c.adam_beta2) << '\n';
  out << "optimizer.eps = " << fmt_double(c.adam_eps) << '\n';
  const char* sched = "constant";
  switch (c.schedule.kind) {
    case ScheduleKind::kConstant: sched = "constant"; break;
    case ScheduleKind::kLinearWarmup: sched = "linear_warmup"; break;
    case ScheduleKind::kCosine: sched = "cosine"; break;
    case ScheduleKind::kWarmupCosine: sched = "warmup_cosine"; break;
  }
  out << "schedule.kind = " << sched << '\n';
  out << "schedule.peak = " << fmt_double(c.schedule.peak) << '\n';
  out << "schedule.warmup_steps = " << c.schedule.warmup_steps << '\n';
  out << "schedule.total_steps = " << c.schedule.total_steps << '\n';
  out << "clip.max_global_norm = "
      << (c.clip.max_global_norm ? fmt_double(*c.clip.max_global_norm) : std::string("none"))
      << '\n';
  out << "batch_size = " << c.batch_size << '\n';
  out << "total_steps = " << c.total_steps << '\n';
  out << "curvature_cadence = " << c.curvature_cadence << '\n';
  out << "probe_batch_size = " << c.probe_batch_size << '\n';
  out << "lanczos.num_iters = " << c.lanczos.num_iters << '\n';
  out << "lanczos.reorthogonalize = " << (c.lanczos.reorthogonalize ? "true" : "false") << '\n';
  out << "lanczos.seed = " << c.lanczos.seed << '\n';
  out << "target_accuracy = " << fmt_double(c.target_accuracy) << '\n';
  out << "stability.c_override = "
      << (c.stability_c_override ? fmt_double(*c.stability_c_override) : std::string("none"))
      << '\n';
  out << "seed = " << c.seed << '\n';
  return out.str();
}

RunConfig parse_run_config(const std::string& text) {
  const KeyValues kv(parse_key_values(text));
  RunConfig c;

  const std::string kind = kv.str("model.kind", "mlp");
  if (kind == "mlp")
    c.model_kind = ModelKind::kMlp;
  else if (kind == "quadratic")
    c.model_kind = ModelKind::kQuadratic;
  else
    throw std::invalid_argument("config: unknown model.kind " + kind);

  if (kv.has("model.widths")) c.model.layer_widths = parse_width_list(kv.str("model.widths", ""));
  const std::string act = kv.str("model.activation", "tanh");
  if (act == "tanh")
    c.model.activation = Activation::kTanh;
  else if (act == "relu")
    c.model.activation = Activation::kRelu;
  else
    throw std::invalid_argument("config: unknown activation " + act);
  const std::string norm = kv.str("model.normalization", "none");
  if (norm == "none")
    c.model.normalization = Normalization::kNone;
  else if (norm == "batch_norm")
    c.model.normalization = Normalization::kBatchNorm;
  else
    throw std::invalid_argument("config: unknown normalization " + norm);
  const std::string loss = kv.str("model.loss", "softmax_cross_entropy");
  if (loss == "softmax_cross_entropy")
    c.model.loss = LossKind::kSoftmaxCrossEntropy;
  else if (loss == "mse")
    c.model.loss = LossKind::kMse;
  else
    throw std::invalid_argument("config: unknown loss " + loss);
  c.model.bn_eps = kv.num("model.bn_eps", 1e-5);

  c.quad.spectrum = parse_double_list(kv.str("quad.spectrum", ""));
  c.quad.theta0 = parse_double_list(kv.str("quad.theta0", ""));
  c.quad.seed = kv.uinteger("quad.seed", 0);

  c.init.scale_alpha = kv.num("init.alpha", 1.0);
  c.init.seed = kv.uinteger("init.seed", 0);

  const std::string source = kv.str("dataset.source", "two_gaussians");
  if (source == "two_gaussians")
    c.dataset.source = DataSource::kTwoGaussians;
  else if (source == "spirals")
    c.dataset.source = DataSource::kSpirals;
  else if (source == "idx_files")
    c.dataset.source = DataSource::kIdxFiles;
  else
    throw std::invalid_argument("config: unknown dataset.source " + source);
  c.dataset.n = kv.integer("dataset.n", 4096);
  c.dataset.dim = static_cast<int>(kv.integer("dataset.dim", 2));
  c.dataset.separation = kv.num("dataset.separation", 4.0);
  c.dataset.turns = kv.num("dataset.turns", 1.5);
  c.dataset.noise = kv.num("dataset.noise", 0.1);
  c.dataset.images_path = kv.str("dataset.images_path", "");
  c.dataset.labels_path = kv.str("dataset.labels_path", "");
  c.dataset.idx_normalize = kv.boolean("dataset.idx_normalize", true);
  c.dataset.train_fraction = kv.num("dataset.train_fraction", 0.875);
  c.dataset.seed = kv.uinteger("dataset.seed", 0);

  const std::string opt = kv.str("optimizer.kind", "sgd_momentum");
  if (opt == "sgd_momentum")
    c.optimizer = OptimizerKind::kSgdMomentum;
  else if (opt == "adam")
    c.optimizer = OptimizerKind::kAdam;
  else
    throw std::invalid_argument("config: unknown optimizer.kind " + opt);
  c.sgd_beta = kv.num("optimizer.beta", 0.9);
  c.sgd_nesterov = kv.boolean("optimizer.nesterov", true);
  c.adam_beta1 = kv.num("optimizer.beta1", 0.9);
  c.adam_beta2 = kv.num("optimizer.beta2", 0.999);
  c.adam_eps = kv.num("optimizer.eps", 1e-8);

  const std::string sched = kv.str("schedule.kind", "constant");
  const double peak = kv.num("schedule.peak", 0.1);
  const long long warmup = kv.integer("schedule.warmup_steps", 0);
  const long long total = kv.integer("schedule.total_steps", 0);
  if (sched == "constant")
    c.schedule = Schedule::constant(peak);
  else if (sched == "linear_warmup")
    c.schedule = Schedule::linear_warmup(warmup, peak);
  else if (sched == "cosine")
    c.schedule = Schedule::cosine(peak, total);
  else if (sched == "warmup_cosine")
    c.schedule = Schedule::warmup_cosine(warmup, peak, total);
  else
    throw std::invalid_argument("config: unknown schedule.kind " + sched);

  const std::string clip = kv.str("clip.max_global_norm", "none");
  if (clip != "none" && !clip.empty()) c.clip.max_global_norm = std::stod(clip);

  c.batch_size = kv.integer("batch_size", 64);
  c.total_steps = kv.integer("total_steps", 5000);
  c.curvature_cadence = kv.integer("curvature_cadence", 100);
  c.probe_batch_size = kv.integer("probe_batch_size", 512);
  c.lanczos.num_iters = static_cast<int>(kv.integer("lanczos.num_iters", 40));
  c.lanczos.reorthogonalize = kv.boolean("lanczos.reorthogonalize", true);
  c.lanczos.seed = kv.uinteger("lanczos.seed", 0);
  c.target_accuracy = kv.num("target_accuracy", 0.85);
  const std::string c_over = kv.str("stability.c_override", "none");
  if (c_over != "none" && !c_over.empty()) c.stability_c_override = std::stod(c_over);
  c.seed = kv.uinteger("seed", 0);

  validate(c);
  return c;
}

void validate(const SweepSpec& spec) {
  if (spec.lr_grid.empty() || spec.batch_grid.empty() || spec.init_alphas.empty() ||
      spec.warmup_lengths.empty())
    throw std::invalid_argument("SweepSpec: grids must be nonempty");
  if (spec.replicates < 1) throw std::invalid_argument("SweepSpec: replicates must be >= 1");
}

SweepSpec default_sweep_spec() {
  SweepSpec s;
  s.lr_grid = logspace_grid(1e-3, 1.0, 7);
  s.batch_grid = pow2_grid(16, 4096);
  return s;
}

std::string serialize_sweep_spec(const SweepSpec& spec) {
  std::ostringstream out;
  out << "sweep.lr_grid = " << fmt_double_list(spec.lr_grid) << '\n';
  out << "sweep.batch_grid = " << fmt_int_list(spec.batch_grid) << '\n';
  out << "sweep.init_alphas = " << fmt_double_list(spec.init_alphas) << '\n';
  out << "sweep.warmup_lengths = " << fmt_int_list(spec.warmup_lengths) << '\n';
  out << "sweep.replicates = " << spec.replicates << '\n';
  return out.str();
}

SweepSpec parse_sweep_spec(const std::string& text) {
  const KeyValues kv(parse_key_values(text));
  SweepSpec def = default_sweep_spec();
  SweepSpec s;
  s.lr_grid = kv.has("sweep.lr_grid") ? parse_double_list(kv.str("sweep.lr_grid", ""))
                                      : def.lr_grid;
  s.batch_grid = kv.has("sweep.batch_grid") ? parse_int_list(kv.str("sweep.batch_grid", ""))
                                            : def.batch_grid;
  if (kv.has("sweep.init_alphas")) s.init_alphas = parse_double_list(kv.str("sweep.init_alphas", ""));
  if (kv.has("sweep.warmup_lengths"))
    s.warmup_lengths = parse_int_list(kv.str("sweep.warmup_lengths", ""));
  s.replicates = static_cast<int>(kv.integer("sweep.replicates", 3));
  validate(s);
  return s;
}

}  // namespace curvlab
