#pragma once

#include <optional>
#include <string>
#include <vector>

#include "probekit/model/manifest.hpp"

namespace probekit::energy {

class EnergyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Duty-cycle current model. The device draws i_sleep_ma in deep sleep,
// i_sleep + awake_overhead while awake, and an extra i_cpu_high while the
// governor holds the CPU at high frequency. Polling faster than
// poll_work_ms + governor_scale_down_ms keeps the CPU at high frequency
// permanently; slower polling pays poll_work_ms of high-frequency time per
// cycle. Defaults were fixed by grid search (tools/energy_calibrate)
// against the target ratios; see docs/energy-model.md.
struct EnergyParams {
  double i_sleep_ma = 15.0;
  double awake_overhead_ma = 35.0;
  double i_cpu_high_ma = 50.0;
  double governor_scale_down_ms = 100.0;
  double poll_work_ms = 24.0;
  double coarse_wakeup_ms = 1000.0;     // awake window per coarse alarm
  double screen_baseline_ma = 400.0;    // extra draw while the screen is on

  static EnergyParams from_json(const model::json& j);
  static EnergyParams from_file(const std::filesystem::path& path);
  model::json to_json() const;
  void validate() const;  // throws EnergyError on non-positive values
};

EnergyParams default_params();

struct PollLoad {
  double interval_ms = 0;
  double work_ms = 0;  // high-frequency CPU time per poll
};

struct Scenario {
  std::string label;
  bool wakelock = false;   // held awake independent of polling
  bool screen_on = false;
  std::vector<PollLoad> polls;
  // Constant high-frequency residency for non-polling load (input logging,
  // audio capture). Zero for manifest-derived scenarios.
  double busy_fraction = 0.0;
};

struct EnergyReport {
  std::string label;
  int64_t duration_ms = 0;
  double avg_current_ma = 0;
  double awake_fraction = 0;
  double high_freq_fraction = 0;
  int64_t wakeup_count = 0;

  model::json to_json() const;
};

// Closed-form steady-state integration of the periodic duty cycle.
// screen_on forces the device awake for the whole run (it ORs with the
// scenario's own flag). Requires duration >= 10x the smallest interval.
EnergyReport simulate(const Scenario& scenario, int64_t duration_ms, const EnergyParams& params,
                      bool screen_on = false);

// One report per scenario plus its ratio against the first (baseline) one.
struct CompareRow {
  EnergyReport report;
  double ratio_vs_baseline = 0;
};
std::vector<CompareRow> compare(const std::vector<Scenario>& scenarios, int64_t duration_ms,
                                const EnergyParams& params);

// Wake plan of the manifest mapped onto the model: polling plugins become
// PollLoads, event plugins contribute nothing, precise polling implies a
// wakelock.
Scenario scenario_from_manifest(const model::ExperimentManifest& manifest,
                                const EnergyParams& params);

// idle, idle_wl, a1..a4 (screen off), b1..b4 (screen on).
std::optional<Scenario> builtin_scenario(const std::string& name, const EnergyParams& params);
std::vector<std::string> builtin_scenario_names();

}  // namespace probekit::energy
