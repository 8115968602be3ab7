#include "probekit/energy/energy_model.hpp"

#include <algorithm>
#include <cmath>

#include "probekit/sched/wake_plan.hpp"
#include "probekit/util/fs.hpp"

namespace probekit::energy {

using model::json;

EnergyParams EnergyParams::from_json(const json& j) {
  EnergyParams p;
  p.i_sleep_ma = j.value("i_sleep_ma", p.i_sleep_ma);
  p.awake_overhead_ma = j.value("awake_overhead_ma", p.awake_overhead_ma);
  p.i_cpu_high_ma = j.value("i_cpu_high_ma", p.i_cpu_high_ma);
  p.governor_scale_down_ms = j.value("governor_scale_down_ms", p.governor_scale_down_ms);
  p.poll_work_ms = j.value("poll_work_ms", p.poll_work_ms);
  p.coarse_wakeup_ms = j.value("coarse_wakeup_ms", p.coarse_wakeup_ms);
  p.screen_baseline_ma = j.value("screen_baseline_ma", p.screen_baseline_ma);
  p.validate();
  return p;
}

EnergyParams EnergyParams::from_file(const std::filesystem::path& path) {
  return from_json(json::parse(util::read_file(path)));
}

json EnergyParams::to_json() const {
  return json{{"i_sleep_ma", i_sleep_ma},
              {"awake_overhead_ma", awake_overhead_ma},
              {"i_cpu_high_ma", i_cpu_high_ma},
              {"governor_scale_down_ms", governor_scale_down_ms},
              {"poll_work_ms", poll_work_ms},
              {"coarse_wakeup_ms", coarse_wakeup_ms},
              {"screen_baseline_ma", screen_baseline_ma}};
}

void EnergyParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0)) throw EnergyError(std::string(name) + " must be positive");
  };
  positive(i_sleep_ma, "i_sleep_ma");
  positive(awake_overhead_ma, "awake_overhead_ma");
  positive(i_cpu_high_ma, "i_cpu_high_ma");
  positive(governor_scale_down_ms, "governor_scale_down_ms");
  positive(poll_work_ms, "poll_work_ms");
  positive(coarse_wakeup_ms, "coarse_wakeup_ms");
  positive(screen_baseline_ma, "screen_baseline_ma");
}

EnergyParams default_params() { return EnergyParams{}; }

EnergyReport simulate(const Scenario& scenario, int64_t duration_ms, const EnergyParams& params,
                      bool screen_on) {
  params.validate();
  if (scenario.busy_fraction < 0 || scenario.busy_fraction > 1) {
    throw EnergyError("busy_fraction out of [0,1]");
  }
  double min_interval = 0;
  for (const PollLoad& p : scenario.polls) {
    if (!(p.interval_ms > 0) || p.work_ms < 0) throw EnergyError("bad poll load");
    if (min_interval == 0 || p.interval_ms < min_interval) min_interval = p.interval_ms;
  }
  if (min_interval > 0 && duration_ms < 10 * min_interval) {
    throw EnergyError("duration too short for steady state (need >= 10x smallest interval)");
  }

  bool awake_held = scenario.wakelock || scenario.screen_on || screen_on;

  // High-frequency residency: a poll cycle shorter than work + scale_down
  // never lets the governor drop; otherwise each cycle pays work_ms high.
  double high = scenario.busy_fraction;
  for (const PollLoad& p : scenario.polls) {
    if (p.interval_ms <= p.work_ms + params.governor_scale_down_ms) {
      high += 1.0;
    } else {
      high += p.work_ms / p.interval_ms;
    }
  }
  high = std::min(1.0, high);

  // Awake residency: held awake, or one coarse_wakeup window per coarse
  // alarm; precise polling implies a held wakelock upstream.
  double awake = 0;
  int64_t wakeups = 0;
  if (awake_held) {
    awake = 1.0;
  } else {
    for (const PollLoad& p : scenario.polls) {
      if (p.interval_ms <= sched::kCoarseThresholdMs) {
        awake = 1.0;  // precise interval without a wakelock flag: treat as held
      } else {
        awake += std::min(params.coarse_wakeup_ms, p.interval_ms) / p.interval_ms;
        wakeups += static_cast<int64_t>(duration_ms / p.interval_ms);
      }
    }
    awake = std::min(1.0, awake);
  }
  awake = std::max(awake, high);  // CPU work implies being awake

  EnergyReport r;
  r.label = scenario.label;
  r.duration_ms = duration_ms;
  r.awake_fraction = awake;
  r.high_freq_fraction = high;
  r.wakeup_count = awake >= 1.0 ? 0 : wakeups;
  r.avg_current_ma = params.i_sleep_ma + params.awake_overhead_ma * awake +
                     params.i_cpu_high_ma * high +
                     ((scenario.screen_on || screen_on) ? params.screen_baseline_ma : 0.0);
  return r;
}

std::vector<CompareRow> compare(const std::vector<Scenario>& scenarios, int64_t duration_ms,
                                const EnergyParams& params) {
  std::vector<CompareRow> rows;
  for (const Scenario& s : scenarios) {
    CompareRow row;
    row.report = simulate(s, duration_ms, params);
    row.ratio_vs_baseline =
        rows.empty() ? 1.0 : row.report.avg_current_ma / rows.front().report.avg_current_ma;
    rows.push_back(std::move(row));
  }
  return rows;
}

Scenario scenario_from_manifest(const model::ExperimentManifest& manifest,
                                const EnergyParams& params) {
  Scenario s;
  s.label = manifest.name.empty() ? manifest.experiment_id : manifest.name;
  sched::WakePlan plan =
      sched::compute_wake_plan(manifest.plugin_configs, manifest.wake_policy);
  s.wakelock = plan.holds_wakelock;
  for (const auto& [id, interval] : plan.precise_polling) {
    s.polls.push_back({static_cast<double>(interval), params.poll_work_ms});
  }
  for (const auto& [id, interval] : plan.coarse_polling) {
    s.polls.push_back({static_cast<double>(interval), params.poll_work_ms});
  }
  return s;
}

model::json EnergyReport::to_json() const {
  return json{{"scenario", label},
              {"duration_ms", duration_ms},
              {"avg_current_ma", avg_current_ma},
              {"awake_fraction", awake_fraction},
              {"high_freq_fraction", high_freq_fraction},
              {"wakeup_count", wakeup_count}};
}

std::optional<Scenario> builtin_scenario(const std::string& name, const EnergyParams& params) {
  const double w = params.poll_work_ms;
  Scenario s;
  s.label = name;
  if (name == "idle") {
    // no load
  } else if (name == "idle_wl") {
    s.wakelock = true;
  } else if (name == "a1") {
    s.wakelock = true;
    s.polls = {{50, w}};
  } else if (name == "a2") {
    s.wakelock = true;
    s.polls = {{100, w}, {100, w}};
  } else if (name == "a3") {
    s.wakelock = true;
    s.polls = {{200, w}};
  } else if (name == "a4") {
    s.wakelock = true;
    s.polls = {{50, w}};
  } else if (name == "b1") {
    s.screen_on = true;
    s.busy_fraction = 0.19;  // input-event logging, calibrated
  } else if (name == "b2") {
    s.screen_on = true;
    s.busy_fraction = 0.19;
    s.polls = {{50, w}, {50, w}};
  } else if (name == "b3") {
    s.screen_on = true;
    s.busy_fraction = 0.19 + 0.30;  // + audio capture, calibrated
  } else if (name == "b4") {
    s.screen_on = true;
    s.busy_fraction = 0.19 + 0.30;
    s.polls = {{50, w}, {50, w}};
  } else {
    return std::nullopt;
  }
  return s;
}

std::vector<std::string> builtin_scenario_names() {
  return {"idle", "idle_wl", "a1", "a2", "a3", "a4", "b1", "b2", "b3", "b4"};
}

}  // namespace probekit::energy
