#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "probekit/model/types.hpp"

namespace probekit::sched {

// Intervals above this can ride low-precision coarse wake-ups; at or below
// it the device must be held awake for precise timers.
constexpr int64_t kCoarseThresholdMs = 10'000;

class WakePolicyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The three wake strategies; the lists partition the plugin configs.
struct WakePlan {
  std::vector<std::string> event_plugins;
  std::vector<std::pair<std::string, int64_t>> coarse_polling;   // interval > threshold
  std::vector<std::pair<std::string, int64_t>> precise_polling;  // interval <= threshold
  bool holds_wakelock = false;
};

// Throws WakePolicyError if precise polling is needed but wakelocks are
// disallowed.
WakePlan compute_wake_plan(const std::vector<model::PluginConfig>& configs,
                           const model::GlobalWakePolicy& policy,
                           int64_t coarse_threshold_ms = kCoarseThresholdMs);

}  // namespace probekit::sched
