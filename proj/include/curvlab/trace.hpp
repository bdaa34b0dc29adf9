// Per-step training records, their JSON-lines persistence, and parameter
// snapshots. Serialization is canonical so identical runs produce identical
// bytes.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "curvlab/model.hpp"
#include "curvlab/stability.hpp"

namespace curvlab {

struct MetricsRow {
  long long step = 0;
  double eta = 0.0;
  double loss = 0.0;
  double grad_norm = 0.0;
  std::optional<double> accuracy;
  std::optional<double> lambda1;
  std::optional<double> lambda1_residual;
  std::optional<double> precond_lambda1;  // Adam runs: lambda_max(D^-1/2 H D^-1/2)
  std::optional<double> gradient_quotient;

  bool operator==(const MetricsRow&) const = default;
};

struct TrainingTrace {
  std::vector<MetricsRow> rows;  // steps strictly increasing
  std::optional<DivergenceEvent> divergence;
  std::optional<RunClassification> classification;
  std::string config_digest;
};

// One JSON object per row; non-finite doubles encode as "nan"/"inf"/"-inf"
// strings so the round trip is exact.
std::string metrics_to_jsonl(const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> metrics_from_jsonl(const std::string& text);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// Flat float64 little-endian array plus a `name offset rows cols` sidecar.
void save_param_snapshot(const std::string& dir, const ParamVector& params);
ParamVector load_param_snapshot(const std::string& dir);

// FNV-1a 64-bit, hex-encoded; used for config digests.
std::string fnv1a_hex(const std::string& text);

}  // namespace curvlab
