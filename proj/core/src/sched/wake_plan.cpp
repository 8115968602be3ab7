#include "probekit/sched/wake_plan.hpp"

namespace probekit::sched {

WakePlan compute_wake_plan(const std::vector<model::PluginConfig>& configs,
                           const model::GlobalWakePolicy& policy, int64_t coarse_threshold_ms) {
  WakePlan plan;
  for (const model::PluginConfig& c : configs) {
    if (c.kind == model::PluginKind::event) {
      plan.event_plugins.push_back(c.plugin_id);
    } else {
      int64_t interval = c.interval_ms.value_or(0);
      if (interval > coarse_threshold_ms) {
        plan.coarse_polling.emplace_back(c.plugin_id, interval);
      } else {
        plan.precise_polling.emplace_back(c.plugin_id, interval);
      }
    }
  }
  if (!plan.precise_polling.empty() && !policy.allow_wakelocks) {
    throw WakePolicyError("precise polling requires wakelocks, which the policy disallows");
  }
  plan.holds_wakelock = !plan.precise_polling.empty() && policy.allow_wakelocks;
  return plan;
}

}  // namespace probekit::sched
