#pragma once

// How many tactics to apply per expansion: the time-decaying dynamic schedule
// n = a + b * exp(-c * r), the fixed-n baseline, and the 5n oversampling rule.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <variant>

#include "dsprover/core.hpp"

namespace dsprover {

struct DynamicScheduleConfig {
  double a = 6.0;   // floor near the end of the budget
  double b = 12.0;  // initial surplus over the floor
  double c = 5.0;   // decay rate
};

struct FixedScheduleConfig {
  std::size_t n = 64;
};

using ScheduleConfig = std::variant<DynamicScheduleConfig, FixedScheduleConfig>;

inline constexpr std::size_t kDefaultOversampleFactor = 5;

inline void validate(const DynamicScheduleConfig& cfg) {
  if (!(cfg.a > 0.0)) throw Error("dynamic schedule: a must be > 0");
  if (!(cfg.b >= 0.0)) throw Error("dynamic schedule: b must be >= 0");
  if (!(cfg.c >= 0.0)) throw Error("dynamic schedule: c must be >= 0");
}

inline void validate(const FixedScheduleConfig& cfg) {
  if (cfg.n < 1) throw Error("fixed schedule: n must be >= 1");
}

struct TimeBudget {
  Duration total{};
  Clock::time_point started_at{};

  Clock::time_point deadline() const { return started_at + total; }
};

// (now - started_at) / total, clamped to [0, 1]. Overruns stay at 1 so the
// schedule never climbs back up.
inline double elapsed_ratio(const TimeBudget& budget, Clock::time_point now) {
  if (budget.total <= Duration::zero()) return 1.0;
  if (now <= budget.started_at) return 0.0;
  const double passed = std::chrono::duration<double>(now - budget.started_at).count();
  const double total = std::chrono::duration<double>(budget.total).count();
  return std::clamp(passed / total, 0.0, 1.0);
}

// Round half up, then clamp to at least 1.
inline std::size_t dynamic_sample_count(const DynamicScheduleConfig& cfg, double r) {
  r = std::clamp(r, 0.0, 1.0);
  const double n = cfg.a + cfg.b * std::exp(-cfg.c * r);
  const double rounded = std::floor(n + 0.5);
  return rounded < 1.0 ? 1 : static_cast<std::size_t>(rounded);
}

inline std::size_t fixed_sample_count(const FixedScheduleConfig& cfg) { return cfg.n; }

inline std::size_t oversample_request(std::size_t n,
                                      std::size_t factor = kDefaultOversampleFactor) {
  return n * factor;
}

inline std::size_t sample_count(const ScheduleConfig& cfg, double r) {
  if (const auto* d = std::get_if<DynamicScheduleConfig>(&cfg)) {
    return dynamic_sample_count(*d, r);
  }
  return fixed_sample_count(std::get<FixedScheduleConfig>(cfg));
}

}  // namespace dsprover
