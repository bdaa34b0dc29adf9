#include "curvlab/stability.hpp"

#include <cmath>
#include <stdexcept>

#include "curvlab/trace.hpp"

namespace curvlab {

double stability_coefficient(OptimizerKind kind, std::optional<double> c_override) {
  if (c_override.has_value()) {
    if (*c_override <= 0.0) throw std::invalid_argument("stability: c must be positive");
    return *c_override;
  }
  return kind == OptimizerKind::kSgdMomentum ? 2.0 : 40.0;
}

double stability_bound(double eta, OptimizerKind kind, std::optional<double> c_override) {
  if (!(eta > 0.0)) throw std::invalid_argument("stability_bound: undefined for eta <= 0");
  return stability_coefficient(kind, c_override) / eta;
}

const char* to_string(DivergenceCause cause) {
  switch (cause) {
    case DivergenceCause::kNanLoss: return "nan_loss";
    case DivergenceCause::kInfLoss: return "inf_loss";
    case DivergenceCause::kNanParam: return "nan_param";
  }
  return "unknown";
}

const char* to_string(RunLabel label) {
  switch (label) {
    case RunLabel::kConverged: return "converged";
    case RunLabel::kDiverged: return "diverged";
    case RunLabel::kCatapult: return "catapult";
  }
  return "unknown";
}

std::optional<DivergenceEvent> detect_divergence(
    const std::vector<double>& loss_series, const std::function<bool(long long)>& param_has_nan) {
  if (loss_series.empty()) throw std::invalid_argument("detect_divergence: empty series");
  for (std::size_t i = 0; i < loss_series.size(); ++i) {
    const double loss = loss_series[i];
    const auto step = static_cast<long long>(i);
    if (std::isnan(loss)) return DivergenceEvent{step, DivergenceCause::kNanLoss};
    if (std::isinf(loss)) return DivergenceEvent{step, DivergenceCause::kInfLoss};
    if (param_has_nan && param_has_nan(step))
      return DivergenceEvent{step, DivergenceCause::kNanParam};
  }
  return std::nullopt;
}

RunClassification classify_run(const TrainingTrace& trace, long long window,
                               double rise_factor) {
  if (trace.rows.empty()) throw std::invalid_argument("classify_run: empty trace");
  if (trace.divergence.has_value())
    return RunClassification{RunLabel::kDiverged, trace.divergence->step, trace.divergence->step};
  for (const auto& row : trace.rows)
    if (!std::isfinite(row.loss))
      return RunClassification{RunLabel::kDiverged, row.step, row.step};

  const double initial = trace.rows.front().loss;
  std::optional<long long> rise_step;
  for (const auto& row : trace.rows) {
    if (!rise_step.has_value()) {
      if (row.step <= window && row.loss > rise_factor * initial) rise_step = row.step;
    } else if (row.loss < initial) {
      return RunClassification{RunLabel::kCatapult, *rise_step, row.step};
    }
  }
  return RunClassification{RunLabel::kConverged, trace.rows.front().step,
                           trace.rows.back().step};
}

std::vector<StabilityRecord> stability_timeline(const TrainingTrace& trace, OptimizerKind kind,
                                                std::optional<double> c_override) {
  const double c = stability_coefficient(kind, c_override);
  std::vector<StabilityRecord> out;
  for (const auto& row : trace.rows) {
    if (!row.lambda1.has_value()) continue;
    if (!(row.eta > 0.0)) continue;
    StabilityRecord rec;
    rec.step = row.step;
    rec.eta = row.eta;
    rec.lambda1 = *row.lambda1;
    rec.bound = c / row.eta;
    rec.ratio = row.eta * rec.lambda1 / c;
    out.push_back(rec);
  }
  return out;
}

}  // namespace curvlab
