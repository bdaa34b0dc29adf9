#include "curvlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "curvlab/precondition.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace curvlab {

namespace fs = std::filesystem;

namespace {

std::string fmt_g(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

bool finite_params(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

struct QuadRunModel {
  QuadraticModel model;
  ParamVector params;
};

QuadRunModel make_quad_run(const RunConfig& config) {
  QuadRunModel q;
  q.model.h_diag = config.quad.spectrum;
  const std::size_t dim = config.quad.spectrum.size();
  std::vector<double> theta0 = config.quad.theta0;
  if (theta0.empty()) {
    SeededRng rng(config.quad.seed);
    theta0 = rng.normal_vector(dim);
    const double norm = kernels::nrm2(theta0);
    for (double& x : theta0) x /= norm;
  } else if (theta0.size() != dim) {
    throw std::invalid_argument("quadratic run: theta0 dim mismatch");
  }
  q.params = ParamVector{std::move(theta0), quadratic_layout(dim)};
  return q;
}

double quad_gradient_quotient(const QuadraticModel& model, const std::vector<double>& theta,
                              double eps) {
  const std::vector<double> g = model.grad(theta);
  const std::vector<double> hg = model.hvp(g);
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    acc += std::abs(hg[i]) / (std::abs(g[i]) + eps);
  return acc / static_cast<double>(g.size());
}

}  // namespace

RunResult run_training_full(const RunConfig& config) {
  validate(config);
  const bool is_mlp = config.model_kind == ModelKind::kMlp;
  const bool is_adam = config.optimizer == OptimizerKind::kAdam;
  const bool has_bn = is_mlp && config.model.normalization == Normalization::kBatchNorm;

  RunResult result;
  result.trace.config_digest = fnv1a_hex(serialize_run_config(config));

  // Model, data, probe batch.
  SplitDataset data;
  ParamVector params;
  Batch probe;
  QuadRunModel quad;
  std::size_t batch_size = static_cast<std::size_t>(config.batch_size);
  if (is_mlp) {
    data = build_dataset(config.dataset);
    params = init_params(config.model, config.init);
    batch_size = std::min(batch_size, data.train.inputs.rows);
    SeededRng probe_rng = SeededRng(config.seed).fork(2);
    const std::size_t probe_size =
        std::min<std::size_t>(static_cast<std::size_t>(config.probe_batch_size),
                              data.train.inputs.rows);
    probe = sample_batch(data.train, probe_size, probe_rng);
  } else {
    quad = make_quad_run(config);
    params = quad.params;
  }
  SeededRng batch_rng = SeededRng(config.seed).fork(1);

  SgdMomentumState sgd = make_sgd_state(params.values.size(), config.sgd_beta,
                                        config.sgd_nesterov);
  AdamState adam = make_adam_state(params.values.size(), config.adam_beta1, config.adam_beta2,
                                   config.adam_eps);
  BnStats running;

  const long long cadence = config.curvature_cadence;

  auto measure = [&](MetricsRow& row) {
    SymmetricOperator op = is_mlp ? hessian_operator(params, probe, config.model)
                                  : quad.model.hessian_operator();
    const SpectrumEstimate est = lanczos_max_eig(op, config.lanczos);
    if (est.ok()) {
      row.lambda1 = est.lambda_max;
      row.lambda1_residual = est.residual;
    }
    if (is_adam && adam.t >= 1) {
      const DiagPreconditioner d = adam_preconditioner(adam, config.adam_eps);
      const SpectrumEstimate pre = lanczos_max_eig(precondition_operator(op, d), config.lanczos);
      if (pre.ok()) row.precond_lambda1 = pre.lambda_max;
    }
    row.gradient_quotient = is_mlp ? gradient_quotient(params, probe, config.model)
                                   : quad_gradient_quotient(quad.model, params.values, 1e-5);
    if (is_mlp && data.validation.inputs.rows > 0)
      row.accuracy = accuracy(params, data.validation.inputs, data.validation.labels,
                              config.model, has_bn ? &running : nullptr);
  };

  double running_min_loss = std::numeric_limits<double>::infinity();
  long long last_measure_step = -cadence;

  for (long long t = 0; t < config.total_steps; ++t) {
    const double eta = schedule_lr(config.schedule, t);
    MetricsRow row;
    row.step = t;
    row.eta = eta;

    // Loss and gradient on this step's training batch.
    double loss;
    std::vector<double> grad;
    BnStats bn_batch;
    if (is_mlp) {
      const Batch batch = sample_batch(data.train, batch_size, batch_rng);
      LossGrad lg = loss_and_grad(params, batch, config.model, has_bn ? &bn_batch : nullptr);
      loss = lg.loss;
      grad = std::move(lg.grad.values);
    } else {
      loss = quad.model.loss(params.values);
      grad = quad.model.grad(params.values);
    }
    row.loss = loss;
    row.grad_norm = global_l2_norm(grad);

    if (std::isfinite(loss)) {
      const bool cadence_due = t % cadence == 0;
      const bool spike = loss > 10.0 * running_min_loss && t - last_measure_step >= cadence;
      if (cadence_due || spike) {
        if (!finite_params(params.values)) {
          result.trace.rows.push_back(row);
          result.trace.divergence = DivergenceEvent{t, DivergenceCause::kNanParam};
          break;
        }
        measure(row);
        last_measure_step = t;
      }
      running_min_loss = std::min(running_min_loss, loss);
      result.trace.rows.push_back(row);
    } else {
      result.trace.rows.push_back(row);
      result.trace.divergence = DivergenceEvent{
          t, std::isnan(loss) ? DivergenceCause::kNanLoss : DivergenceCause::kInfLoss};
      break;
    }

    grad = clip_gradient(std::move(grad), config.clip);
    if (is_adam)
      adam_step(adam, params.values, grad, eta);
    else
      sgd_step(sgd, params.values, grad, eta);
    if (has_bn) update_running_stats(running, bn_batch, 0.9);
  }

  // Final measurement row (cadence-aligned runs measure at total_steps too).
  if (!result.trace.divergence.has_value()) {
    const long long t = config.total_steps;
    MetricsRow row;
    row.step = t;
    row.eta = schedule_lr(config.schedule, t);
    if (is_mlp) {
      const double loss = mlp_loss(params, probe, config.model);
      LossGrad lg = loss_and_grad(params, probe, config.model);
      row.loss = loss;
      row.grad_norm = global_l2_norm(lg.grad.values);
    } else {
      row.loss = quad.model.loss(params.values);
      row.grad_norm = global_l2_norm(quad.model.grad(params.values));
    }
    if (std::isfinite(row.loss) && finite_params(params.values)) {
      if (t % cadence == 0) measure(row);
      result.trace.rows.push_back(row);
    } else {
      result.trace.rows.push_back(row);
      result.trace.divergence = DivergenceEvent{
          t, std::isnan(row.loss) ? DivergenceCause::kNanLoss : DivergenceCause::kInfLoss};
    }
  }

  result.trace.classification =
      classify_run(result.trace, std::max<long long>(1, config.total_steps / 10), 1.5);
  result.final_params = std::move(params);
  result.bn_running = std::move(running);
  return result;
}

TrainingTrace run_training(const RunConfig& config) {
  return run_training_full(config).trace;
}

std::optional<long long> steps_to_target(const TrainingTrace& trace, double target_accuracy) {
  for (const auto& row : trace.rows)
    if (row.accuracy.has_value() && *row.accuracy >= target_accuracy) return row.step;
  return std::nullopt;
}

SpeedupResult normalize_speedup(
    const std::map<long long, std::optional<double>>& steps_by_batch,
    long long reference_batch) {
  auto ref = steps_by_batch.find(reference_batch);
  if (ref == steps_by_batch.end() || !ref->second.has_value())
    throw std::invalid_argument("normalize_speedup: reference batch " +
                                std::to_string(reference_batch) + " missing or never on target");
  SpeedupResult out;
  for (const auto& [batch, steps] : steps_by_batch) {
    if (!steps.has_value()) {
      out.excluded.push_back(batch);
      continue;
    }
    out.ratios[batch] = *steps / *ref->second;
  }
  return out;
}

OptimalLrResult optimal_lr(const std::vector<LrOutcome>& outcomes) {
  if (outcomes.empty()) throw std::invalid_argument("optimal_lr: no outcomes");
  OptimalLrResult res;

  double largest_nondivergent = -1.0;
  bool any_nondivergent = false;
  for (const auto& o : outcomes) {
    if (o.diverged) continue;
    any_nondivergent = true;
    largest_nondivergent = std::max(largest_nondivergent, o.eta);
  }
  if (!any_nondivergent) {
    res.all_divergent = true;
    return res;
  }

  bool found = false;
  for (const auto& o : outcomes) {
    if (o.diverged || !o.steps.has_value()) continue;
    if (!found || *o.steps < *res.steps ||
        (*o.steps == *res.steps && o.eta < res.eta)) {
      res.eta = o.eta;
      res.steps = o.steps;
      found = true;
    }
  }
  if (!found) {
    res.none_reached_target = true;
    return res;
  }
  res.eta_is_largest_nondivergent = res.eta == largest_nondivergent;
  return res;
}

namespace {

std::optional<double> opt_ll_to_d(const std::optional<long long>& v) {
  if (!v.has_value()) return std::nullopt;
  return static_cast<double>(*v);
}

void summarize_cell(SweepCell& cell, const TrainingTrace& trace, double target_accuracy) {
  cell.label = trace.classification ? trace.classification->label : RunLabel::kConverged;
  if (trace.divergence) {
    cell.divergence_step = trace.divergence->step;
    cell.divergence_cause = to_string(trace.divergence->cause);
  }
  cell.steps_to_target = steps_to_target(trace, target_accuracy);

  const long long mid_target = cell.config.total_steps / 2;
  long long best_mid_gap = std::numeric_limits<long long>::max();
  for (const auto& row : trace.rows) {
    if (!row.lambda1.has_value()) continue;
    if (row.step == 0 && !cell.init_lambda1.has_value()) cell.init_lambda1 = row.lambda1;
    const long long gap = std::llabs(row.step - mid_target);
    if (gap < best_mid_gap) {
      best_mid_gap = gap;
      cell.mid_step = row.step;
      cell.mid_eta = row.eta;
      cell.mid_lambda1 = row.lambda1;
    }
    cell.last_lambda1_step = row.step;
    cell.last_eta = row.eta;
    cell.last_lambda1 = row.lambda1;
  }
  if (!trace.rows.empty()) cell.final_loss = trace.rows.back().loss;
  for (auto it = trace.rows.rbegin(); it != trace.rows.rend(); ++it) {
    if (it->accuracy.has_value()) {
      cell.final_accuracy = it->accuracy;
      break;
    }
  }
}

std::string opt_to_csv(const std::optional<double>& v) { return v ? fmt_g(*v) : ""; }
std::string opt_to_csv(const std::optional<long long>& v) {
  return v ? std::to_string(*v) : "";
}

}  // namespace

SweepReport run_sweep(const SweepSpec& spec, const RunConfig& base, const std::string& out_dir,
                      int parallelism) {
  validate(spec);
  validate(base);
  fs::create_directories(fs::path(out_dir) / "cells");

  SweepReport report;
  for (double alpha : spec.init_alphas) {
    for (long long warmup : spec.warmup_lengths) {
      for (long long batch : spec.batch_grid) {
        for (double lr : spec.lr_grid) {
          for (int rep = 0; rep < spec.replicates; ++rep) {
            SweepCell cell;
            cell.index = report.cells.size();
            cell.lr = lr;
            cell.batch = batch;
            cell.alpha = alpha;
            cell.warmup = warmup;
            cell.replicate = rep;
            cell.config = base;
            cell.config.init.scale_alpha = alpha;
            cell.config.batch_size = batch;
            cell.config.schedule =
                warmup == 0 ? Schedule::cosine(lr, base.total_steps)
                            : Schedule::warmup_cosine(warmup, lr, base.total_steps);
            cell.config.seed = base.seed + 1299721ULL * static_cast<std::uint64_t>(rep);
            cell.config.init.seed =
                base.init.seed + 7919ULL * static_cast<std::uint64_t>(rep);
            std::ostringstream name;
            name << "lr" << fmt_g(lr) << "_b" << batch << "_a" << fmt_g(alpha) << "_w" << warmup
                 << "_r" << rep;
            cell.name = name.str();
            report.cells.push_back(std::move(cell));
          }
        }
      }
    }
  }

  const int nthreads = parallelism > 0 ? parallelism :
#ifdef _OPENMP
                                       omp_get_max_threads();
#else
                                       1;
#endif
#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
  for (long long i = 0; i < static_cast<long long>(report.cells.size()); ++i) {
    SweepCell& cell = report.cells[static_cast<std::size_t>(i)];
    try {
      const RunResult res = run_training_full(cell.config);
      save_run((fs::path(out_dir) / "cells" / cell.name).string(), cell.config, res.trace,
               &res.final_params);
      summarize_cell(cell, res.trace, cell.config.target_accuracy);
    } catch (const std::exception& e) {
      cell.failed = true;
      cell.error = e.what();
    }
  }

  // Per-cell summary table.
  std::ostringstream csv;
  csv << "cell,lr,batch,alpha,warmup,replicate,status,label,divergence_step,divergence_cause,"
         "steps_to_target,init_lambda1,peak_eta,mid_step,mid_eta,mid_lambda1,last_lambda1_step,"
         "last_eta,last_lambda1,final_loss,final_accuracy\n";
  for (const auto& c : report.cells) {
    csv << c.name << ',' << fmt_g(c.lr) << ',' << c.batch << ',' << fmt_g(c.alpha) << ','
        << c.warmup << ',' << c.replicate << ',' << (c.failed ? "failed" : "ok") << ','
        << (c.failed ? "" : to_string(c.label)) << ',' << opt_to_csv(c.divergence_step) << ','
        << c.divergence_cause << ',' << opt_to_csv(c.steps_to_target) << ','
        << opt_to_csv(c.init_lambda1) << ',' << fmt_g(c.lr) << ',' << opt_to_csv(c.mid_step)
        << ',' << opt_to_csv(c.mid_eta) << ',' << opt_to_csv(c.mid_lambda1) << ','
        << opt_to_csv(c.last_lambda1_step) << ',' << opt_to_csv(c.last_eta) << ','
        << opt_to_csv(c.last_lambda1) << ',' << opt_to_csv(c.final_loss) << ','
        << opt_to_csv(c.final_accuracy) << '\n';
  }
  report.summary_csv = csv.str();

  // Batch-scaling table: optimal lr per (alpha, warmup, batch), replicates
  // aggregated (divergent if any replicate diverged; steps averaged over
  // replicates that reached the target).
  std::ostringstream scaling;
  scaling << "alpha,warmup,batch,eta_star,steps_to_target,largest_nondivergent,all_divergent,"
             "none_reached_target,normalized_vs_64\n";
  for (double alpha : spec.init_alphas) {
    for (long long warmup : spec.warmup_lengths) {
      std::map<long long, OptimalLrResult> per_batch;
      for (long long batch : spec.batch_grid) {
        std::vector<LrOutcome> outcomes;
        for (double lr : spec.lr_grid) {
          LrOutcome o;
          o.eta = lr;
          int reached = 0;
          double steps_sum = 0.0;
          for (const auto& c : report.cells) {
            if (c.alpha != alpha || c.warmup != warmup || c.batch != batch || c.lr != lr)
              continue;
            if (c.failed || c.label == RunLabel::kDiverged) o.diverged = true;
            if (c.steps_to_target.has_value()) {
              ++reached;
              steps_sum += static_cast<double>(*c.steps_to_target);
            }
          }
          if (reached > 0) o.steps = steps_sum / reached;
          outcomes.push_back(o);
        }
        per_batch[batch] = optimal_lr(outcomes);
      }

      std::map<long long, std::optional<double>> steps_by_batch;
      for (const auto& [batch, res] : per_batch)
        steps_by_batch[batch] =
            (res.all_divergent || res.none_reached_target) ? std::nullopt : res.steps;
      std::map<long long, double> ratios;
      if (steps_by_batch.count(64) > 0 && steps_by_batch[64].has_value())
        ratios = normalize_speedup(steps_by_batch, 64).ratios;

      for (const auto& [batch, res] : per_batch) {
        scaling << fmt_g(alpha) << ',' << warmup << ',' << batch << ','
                << (res.all_divergent ? "" : fmt_g(res.eta)) << ',' << opt_to_csv(res.steps)
                << ',' << (res.eta_is_largest_nondivergent ? "true" : "false") << ','
                << (res.all_divergent ? "true" : "false") << ','
                << (res.none_reached_target ? "true" : "false") << ','
                << (ratios.count(batch) ? fmt_g(ratios[batch]) : "") << '\n';
      }
    }
  }
  report.scaling_csv = scaling.str();

  write_text_file((fs::path(out_dir) / "sweep_summary.csv").string(), report.summary_csv);
  write_text_file((fs::path(out_dir) / "batch_scaling.csv").string(), report.scaling_csv);
  return report;
}

void save_run(const std::string& dir, const RunConfig& config, const TrainingTrace& trace,
              const ParamVector* final_params) {
  fs::create_directories(dir);
  write_text_file((fs::path(dir) / "config.txt").string(), serialize_run_config(config));
  write_text_file((fs::path(dir) / "metrics.jsonl").string(), metrics_to_jsonl(trace.rows));

  std::ostringstream summary;
  summary << "config_digest = " << trace.config_digest << '\n';
  summary << "rows = " << trace.rows.size() << '\n';
  if (trace.divergence) {
    summary << "divergence_step = " << trace.divergence->step << '\n';
    summary << "divergence_cause = " << to_string(trace.divergence->cause) << '\n';
  }
  if (trace.classification) {
    summary << "label = " << to_string(trace.classification->label) << '\n';
    summary << "evidence_begin = " << trace.classification->evidence_begin << '\n';
    summary << "evidence_end = " << trace.classification->evidence_end << '\n';
  }
  if (!trace.rows.empty()) {
    summary << "final_step = " << trace.rows.back().step << '\n';
    summary << "final_loss = " << fmt_g(trace.rows.back().loss) << '\n';
  }
  write_text_file((fs::path(dir) / "summary.txt").string(), summary.str());

  if (final_params != nullptr) save_param_snapshot(dir, *final_params);
}

SpectrumEstimate reestimate_spectrum(const std::string& run_dir,
                                     std::optional<LanczosConfig> lanczos_override) {
  const RunConfig config =
      parse_run_config(read_text_file((fs::path(run_dir) / "config.txt").string()));
  const ParamVector params = load_param_snapshot(run_dir);
  const LanczosConfig lanczos = lanczos_override.value_or(config.lanczos);

  if (config.model_kind == ModelKind::kQuadratic) {
    QuadraticModel model;
    model.h_diag = config.quad.spectrum;
    return lanczos_max_eig(model.hessian_operator(), lanczos);
  }

  // Rebuild the run's probe batch from the persisted config.
  SplitDataset data = build_dataset(config.dataset);
  SeededRng probe_rng = SeededRng(config.seed).fork(2);
  const std::size_t probe_size = std::min<std::size_t>(
      static_cast<std::size_t>(config.probe_batch_size), data.train.inputs.rows);
  const Batch probe = sample_batch(data.train, probe_size, probe_rng);
  return lanczos_max_eig(hessian_operator(params, probe, config.model), lanczos);
}

}  // namespace curvlab
