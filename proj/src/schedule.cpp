#include "curvlab/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace curvlab {

namespace {
constexpr double kPi = 3.14159265358979323846;

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}
}  // namespace

Schedule Schedule::constant(double eta) {
  require(eta > 0.0, "Schedule: peak must be positive");
  return Schedule{ScheduleKind::kConstant, eta, 0, 0};
}

Schedule Schedule::linear_warmup(long long steps, double peak) {
  require(peak > 0.0, "Schedule: peak must be positive");
  require(steps >= 1, "Schedule: warmup_steps must be >= 1");
  return Schedule{ScheduleKind::kLinearWarmup, peak, steps, 0};
}

Schedule Schedule::cosine(double peak, long long total_steps) {
  require(peak > 0.0, "Schedule: peak must be positive");
  require(total_steps >= 1, "Schedule: total_steps must be >= 1");
  return Schedule{ScheduleKind::kCosine, peak, 0, total_steps};
}

Schedule Schedule::warmup_cosine(long long warmup_steps, double peak, long long total_steps) {
  require(peak > 0.0, "Schedule: peak must be positive");
  require(warmup_steps >= 1, "Schedule: warmup_steps must be >= 1");
  require(warmup_steps < total_steps, "Schedule: warmup_steps must precede total_steps");
  return Schedule{ScheduleKind::kWarmupCosine, peak, warmup_steps, total_steps};
}

double schedule_lr(const Schedule& s, long long step) {
  if (step < 0) throw std::invalid_argument("schedule_lr: step must be >= 0");
  switch (s.kind) {
    case ScheduleKind::kConstant:
      return s.peak;
    case ScheduleKind::kLinearWarmup: {
      if (step >= s.warmup_steps) return s.peak;
      return s.peak * static_cast<double>(step) / static_cast<double>(s.warmup_steps);
    }
    case ScheduleKind::kCosine: {
      if (step >= s.total_steps) return 0.0;
      const double phase = static_cast<double>(step) / static_cast<double>(s.total_steps);
      return s.peak * 0.5 * (1.0 + std::cos(kPi * phase));
    }
    case ScheduleKind::kWarmupCosine: {
      if (step <= s.warmup_steps)
        return s.peak * static_cast<double>(step) / static_cast<double>(s.warmup_steps);
      if (step >= s.total_steps) return 0.0;
      const double phase = static_cast<double>(step - s.warmup_steps) /
                           static_cast<double>(s.total_steps - s.warmup_steps);
      return s.peak * 0.5 * (1.0 + std::cos(kPi * phase));
    }
  }
  throw std::logic_error("schedule_lr: unknown kind");
}

}  // namespace curvlab
