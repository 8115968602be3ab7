#pragma once

#include <filesystem>
#include <memory>
#include <mutex>

#include "probekit/model/manifest.hpp"
#include "probekit/plugin/registry.hpp"
#include "probekit/sched/clock.hpp"
#include "probekit/sched/run_state.hpp"
#include "probekit/sched/wake_plan.hpp"
#include "probekit/storage/storage_manager.hpp"

namespace probekit::sched {

// Runs one experiment: instantiates its plugins, subscribes event plugins,
// drives polling timers (aligned to experiment start) and persists running
// state for restart.
//
// Time is advanced explicitly via advance_to(); with a SimulatedClock the
// runner steps the clock through every deadline so runs are deterministic.
// A real-time driver (the agent daemon) calls advance_to(now) around
// next_deadline(); overdue periods are then skipped and counted as missed,
// never burst-executed.
class ExperimentRunner {
 public:
  struct Options {
    int64_t coarse_threshold_ms = kCoarseThresholdMs;
    int64_t precise_tolerance_ms = 5;
  };

  ExperimentRunner(model::ExperimentManifest manifest, storage::StorageManager& storage,
                   Clock& clock, plugins::EventBus& bus, std::filesystem::path state_path);
  ExperimentRunner(model::ExperimentManifest manifest, storage::StorageManager& storage,
                   Clock& clock, plugins::EventBus& bus, std::filesystem::path state_path,
                   Options options);
  ~ExperimentRunner();

  ExperimentRunner(const ExperimentRunner&) = delete;
  ExperimentRunner& operator=(const ExperimentRunner&) = delete;

  // Instantiation failure tears down anything already started and rethrows.
  void start();

  void advance_to(int64_t t);

  // Idempotent; flushes storage and seals the open chunk.
  RunState stop();

  RunState status() const;
  bool running() const;
  int64_t next_deadline() const;
  const WakePlan& wake_plan() const { return plan_; }
  const model::ExperimentManifest& manifest() const { return manifest_; }

 private:
  class StorageReporter;
  struct Timer {
    std::string plugin_id;
    int64_t interval_ms = 0;
    int64_t next_due = 0;
    bool precise = false;
  };

  void fire_timer(Timer& timer, int64_t fire_time);
  bool activity_allows() const;
  void load_activity_trace();

  model::ExperimentManifest manifest_;
  storage::StorageManager& storage_;
  Clock& clock_;
  SimulatedClock* sim_clock_;  // non-null when driven deterministically
  plugins::EventBus& bus_;
  std::filesystem::path state_path_;
  Options options_;
  WakePlan plan_;

  mutable std::recursive_mutex mu_;
  bool running_ = false;
  RunState state_;
  std::unique_ptr<StorageReporter> reporter_;
  std::map<std::string, std::unique_ptr<plugins::PluginInstance>> instances_;
  std::vector<Timer> timers_;
  std::vector<std::pair<int64_t, bool>> trace_events_;  // (ts, active), sorted
  size_t next_trace_event_ = 0;
  int activity_sub_id_ = 0;
  bool active_ = true;
};

}  // namespace probekit::sched
