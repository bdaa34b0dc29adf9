// The instrumented training loop, sweep execution, steps-to-target analysis,
// and run persistence.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "curvlab/config.hpp"
#include "curvlab/lanczos.hpp"
#include "curvlab/trace.hpp"

namespace curvlab {

struct RunResult {
  TrainingTrace trace;
  ParamVector final_params;
  BnStats bn_running;
};

// Executes {sample batch -> loss/grad -> clip -> optimizer step at
// schedule_lr(step)}. At cadence steps (plus a best-effort measurement when
// the loss first spikes past 10x its running minimum) the Hessian of the
// fixed probe batch is measured: lambda_1 by Lanczos, the preconditioned
// lambda_1 under Adam, the gradient quotient, and validation accuracy.
// Divergence is a recorded outcome. Bit-reproducible for a fixed config.
RunResult run_training_full(const RunConfig& config);
TrainingTrace run_training(const RunConfig& config);

// First measured step whose accuracy reaches the target.
std::optional<long long> steps_to_target(const TrainingTrace& trace, double target_accuracy);

struct SpeedupResult {
  std::map<long long, double> ratios;   // batch -> steps[batch] / steps[reference]
  std::vector<long long> excluded;      // batches that never reached the target
};

// Throws std::invalid_argument when the reference batch is missing or never
// reached the target.
SpeedupResult normalize_speedup(
    const std::map<long long, std::optional<double>>& steps_by_batch,
    long long reference_batch = 64);

struct LrOutcome {
  double eta = 0.0;
  bool diverged = false;
  std::optional<double> steps;  // steps to target; empty when never reached
};

struct OptimalLrResult {
  bool all_divergent = false;
  bool none_reached_target = false;
  double eta = 0.0;
  std::optional<double> steps;
  bool eta_is_largest_nondivergent = false;
};

// Minimizes steps among non-divergent outcomes; ties go to the smaller eta.
OptimalLrResult optimal_lr(const std::vector<LrOutcome>& outcomes);

struct SweepCell {
  std::size_t index = 0;
  double lr = 0.0;
  long long batch = 0;
  double alpha = 1.0;
  long long warmup = 0;
  int replicate = 0;
  std::string name;
  RunConfig config;

  bool failed = false;
  std::string error;
  RunLabel label = RunLabel::kConverged;
  std::optional<long long> divergence_step;
  std::string divergence_cause;
  std::optional<long long> steps_to_target;
  std::optional<double> init_lambda1;
  std::optional<long long> mid_step;
  std::optional<double> mid_eta;
  std::optional<double> mid_lambda1;
  std::optional<long long> last_lambda1_step;
  std::optional<double> last_eta;
  std::optional<double> last_lambda1;
  std::optional<double> final_loss;
  std::optional<double> final_accuracy;
};

struct SweepReport {
  std::vector<SweepCell> cells;
  std::string summary_csv;  // one row per cell
  std::string scaling_csv;  // optimal lr + steps-to-target per (alpha, batch)
};

// Cross product of the sweep grids over the base config. Cells run
// independently (optionally in parallel); individual failures are recorded
// and never abort the sweep. Traces persist under out_dir/cells/<name>.
SweepReport run_sweep(const SweepSpec& spec, const RunConfig& base, const std::string& out_dir,
                      int parallelism = 0);

void save_run(const std::string& dir, const RunConfig& config, const TrainingTrace& trace,
              const ParamVector* final_params);

// Re-estimate lambda_1 from a persisted run directory (config + snapshot).
SpectrumEstimate reestimate_spectrum(const std::string& run_dir,
                                     std::optional<LanczosConfig> lanczos_override = {});

}  // namespace curvlab
