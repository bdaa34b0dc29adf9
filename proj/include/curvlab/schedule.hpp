// Learning-rate schedules: constant, linear warmup, cosine decay, and
// warmup followed by cosine over the remaining steps.

#pragma once

namespace curvlab {

enum class ScheduleKind { kConstant, kLinearWarmup, kCosine, kWarmupCosine };

struct Schedule {
  ScheduleKind kind = ScheduleKind::kConstant;
  double peak = 0.1;
  long long warmup_steps = 0;
  long long total_steps = 0;

  static Schedule constant(double eta);
  static Schedule linear_warmup(long long steps, double peak);
  static Schedule cosine(double peak, long long total_steps);
  static Schedule warmup_cosine(long long warmup_steps, double peak, long long total_steps);
};

// Warmup starts at exactly 0 at step 0; cosine reaches exactly 0 at
// total_steps. The warmup/cosine junction is continuous (both sides = peak).
double schedule_lr(const Schedule& s, long long step);

}  // namespace curvlab
