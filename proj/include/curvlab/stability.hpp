// Stability bounds (c / eta), divergence detection, and run classification
// against the dynamical stability picture: training stays healthy only while
// lambda_1 <= c / eta (c = 2 for SGD+momentum, empirically 40 for Adam).

#pragma once

#include <functional>
#include <optional>
#include <vector>

namespace curvlab {

struct TrainingTrace;  // trace.hpp

enum class OptimizerKind { kSgdMomentum, kAdam };

// c = 2 (sgd_momentum) or c = 40 (adam) unless overridden.
double stability_coefficient(OptimizerKind kind, std::optional<double> c_override = {});

// c / eta. Throws std::invalid_argument for eta <= 0 (callers skip the
// eta = 0 warmup step).
double stability_bound(double eta, OptimizerKind kind, std::optional<double> c_override = {});

enum class DivergenceCause { kNanLoss, kInfLoss, kNanParam };

struct DivergenceEvent {
  long long step = 0;  // first offending index
  DivergenceCause cause = DivergenceCause::kNanLoss;
};

const char* to_string(DivergenceCause cause);

// First step whose loss is NaN/Inf, or whose parameters contain a NaN when
// the hook is provided. Loss is checked before the hook at each step.
std::optional<DivergenceEvent> detect_divergence(
    const std::vector<double>& loss_series,
    const std::function<bool(long long)>& param_has_nan = nullptr);

enum class RunLabel { kConverged, kDiverged, kCatapult };

const char* to_string(RunLabel label);

struct RunClassification {
  RunLabel label = RunLabel::kConverged;
  long long evidence_begin = 0;  // steps supporting the label
  long long evidence_end = 0;
};

// diverged: a divergence event exists. catapult: within the first `window`
// steps the loss exceeds rise_factor * initial loss, later drops back below
// the initial loss, and the run finishes finite. converged otherwise.
RunClassification classify_run(const TrainingTrace& trace, long long window, double rise_factor);

struct StabilityRecord {
  long long step = 0;
  double eta = 0.0;
  double lambda1 = 0.0;
  double bound = 0.0;  // c / eta
  double ratio = 0.0;  // eta * lambda1 / c
};

// One record per lambda_1 measurement, skipping steps where eta = 0.
std::vector<StabilityRecord> stability_timeline(const TrainingTrace& trace, OptimizerKind kind,
                                                std::optional<double> c_override = {});

}  // namespace curvlab
