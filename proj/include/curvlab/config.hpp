// Run and sweep configuration: a flat `key = value` text format with a
// canonical serialization (fixed key order, round-trip exact doubles) so a
// config digest identifies a run.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "curvlab/dataset.hpp"
#include "curvlab/lanczos.hpp"
#include "curvlab/model.hpp"
#include "curvlab/optim.hpp"
#include "curvlab/schedule.hpp"
#include "curvlab/stability.hpp"

namespace curvlab {

enum class ModelKind { kMlp, kQuadratic };

struct QuadraticRunSpec {
  std::vector<double> spectrum;  // diagonal H
  std::vector<double> theta0;    // optional; empty -> unit-norm Gaussian from seed
  std::uint64_t seed = 0;
};

struct RunConfig {
  ModelKind model_kind = ModelKind::kMlp;
  MlpConfig model{{2, 64, 64, 2}};
  InitSpec init;
  QuadraticRunSpec quad;
  DatasetSpec dataset;

  OptimizerKind optimizer = OptimizerKind::kSgdMomentum;
  double sgd_beta = 0.9;
  bool sgd_nesterov = true;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  Schedule schedule = Schedule::constant(0.1);
  ClipConfig clip;

  long long batch_size = 64;
  long long total_steps = 5000;
  long long curvature_cadence = 100;
  long long probe_batch_size = 512;
  LanczosConfig lanczos;
  double target_accuracy = 0.85;
  std::optional<double> stability_c_override;
  std::uint64_t seed = 0;
};

void validate(const RunConfig& config);

std::string serialize_run_config(const RunConfig& config);
RunConfig parse_run_config(const std::string& text);

struct SweepSpec {
  std::vector<double> lr_grid;          // default: log grid 1e-3 .. 1
  std::vector<long long> batch_grid;    // default: powers of 2, 16 .. 4096
  std::vector<double> init_alphas{1.0};
  std::vector<long long> warmup_lengths{0};
  int replicates = 3;
};

void validate(const SweepSpec& spec);

SweepSpec default_sweep_spec();

// A sweep file holds the base run config keys plus sweep.* keys.
std::string serialize_sweep_spec(const SweepSpec& spec);
SweepSpec parse_sweep_spec(const std::string& text);

// Grid helpers (also accepted in config values as "logspace:lo:hi:n" and
// "pow2:lo:hi").
std::vector<double> logspace_grid(double lo, double hi, int n);
std::vector<long long> pow2_grid(long long lo, long long hi);

// Low-level key=value access shared by the parsers.
std::map<std::string, std::string> parse_key_values(const std::string& text);

}  // namespace curvlab
