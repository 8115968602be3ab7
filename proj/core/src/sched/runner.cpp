#include "probekit/sched/runner.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

namespace probekit::sched {

using model::PluginKind;

// Capability-gated sink: emissions from a plugin whose required
// capabilities are not all granted are rejected; event emissions are
// dropped while the activity gate is closed.
class ExperimentRunner::StorageReporter : public plugins::Reporter {
 public:
  StorageReporter(ExperimentRunner& runner) : runner_(runner) {}

  void emit(const std::string& plugin_id, const model::json& payload) override {
    if (!check(plugin_id)) return;
    runner_.storage_.append(plugin_id, payload, runner_.clock_);
    count(plugin_id);
  }

  void emit_blob(const std::string& plugin_id, const std::string& name,
                 const std::vector<uint8_t>& bytes) override {
    if (!check(plugin_id)) return;
    runner_.storage_.append_blob(plugin_id, name,
                                 std::string(bytes.begin(), bytes.end()), runner_.clock_);
    count(plugin_id);
  }

 private:
  // Returns false when the emission should be silently dropped (activity
  // gate); throws when the capability grant is violated.
  bool check(const std::string& plugin_id) {
    const plugins::PluginDescriptor* desc = plugins::Registry::find(plugin_id);
    if (!desc) throw plugins::EmissionRejected("emission from unknown plugin " + plugin_id);
    for (model::Capability c : desc->required_capabilities) {
      if (!runner_.manifest_.capabilities.count(c)) {
        throw plugins::EmissionRejected("plugin " + plugin_id + " lacks granted capability " +
                                        model::capability_name(c));
      }
    }
    std::lock_guard lock(runner_.mu_);
    if (!runner_.running_) return false;
    if (runner_.manifest_.wake_policy.active_only && !runner_.active_) return false;
    return true;
  }

  void count(const std::string& plugin_id) {
    std::lock_guard lock(runner_.mu_);
    runner_.state_.plugins[plugin_id].records_emitted++;
  }

  ExperimentRunner& runner_;
};

ExperimentRunner::ExperimentRunner(model::ExperimentManifest manifest,
                                   storage::StorageManager& storage, Clock& clock,
                                   plugins::EventBus& bus, std::filesystem::path state_path)
    : ExperimentRunner(std::move(manifest), storage, clock, bus, std::move(state_path),
                       Options{}) {}

ExperimentRunner::ExperimentRunner(model::ExperimentManifest manifest,
                                   storage::StorageManager& storage, Clock& clock,
                                   plugins::EventBus& bus, std::filesystem::path state_path,
                                   Options options)
    : manifest_(std::move(manifest)),
      storage_(storage),
      clock_(clock),
      sim_clock_(dynamic_cast<SimulatedClock*>(&clock)),
      bus_(bus),
      state_path_(std::move(state_path)),
      options_(options) {}

ExperimentRunner::~ExperimentRunner() {
  try {
    if (running_) stop();
  } catch (...) {
  }
}

void ExperimentRunner::load_activity_trace() {
  for (const model::PluginConfig& c : manifest_.plugin_configs) {
    if (c.plugin_id != "activity_state") continue;
    auto it = c.options.find("trace_file");
    if (it == c.options.end()) continue;
    const std::string* path = std::get_if<std::string>(&it->second);
    if (!path || path->empty()) continue;
    std::ifstream in(*path);
    if (!in) continue;
    int64_t offset;
    std::string state;
    while (in >> offset >> state) {
      trace_events_.emplace_back(state_.started_ts + offset, state == "active");
    }
    std::sort(trace_events_.begin(), trace_events_.end());
  }
}

void ExperimentRunner::start() {
  std::lock_guard lock(mu_);
  if (running_) throw std::logic_error("experiment already running");
  plan_ = compute_wake_plan(manifest_.plugin_configs, manifest_.wake_policy,
                            options_.coarse_threshold_ms);
  reporter_ = std::make_unique<StorageReporter>(*this);

  state_ = RunState{};
  state_.experiment_id = manifest_.experiment_id;
  state_.started_ts = clock_.now_ms();
  for (const model::PluginConfig& c : manifest_.plugin_configs) {
    state_.plugins[c.plugin_id];  // all counters start at zero
  }

  try {
    for (const model::PluginConfig& c : manifest_.plugin_configs) {
      instances_[c.plugin_id] = plugins::Registry::instantiate(c.plugin_id, c.options, *reporter_);
    }
  } catch (...) {
    // Abort start; tear down anything already instantiated.
    instances_.clear();
    reporter_.reset();
    throw;
  }

  // Activity signal for active_only gating (if a trace is configured, the
  // runner replays it onto the bus during advance_to).
  active_ = true;
  load_activity_trace();
  if (trace_events_.empty()) {
    // all-idle traces begin idle before the first event
  } else {
    active_ = false;
  }
  activity_sub_id_ = bus_.subscribe([this](const plugins::HostEvent& e) {
    if (e.type != "activity") return;
    std::lock_guard l(mu_);
    active_ = e.data.value("state", "") == "active";
  });

  running_ = true;
  for (const auto& [id, interval] : plan_.precise_polling) {
    timers_.push_back({id, interval, state_.started_ts + interval, true});
  }
  for (const auto& [id, interval] : plan_.coarse_polling) {
    timers_.push_back({id, interval, state_.started_ts + interval, false});
  }
  for (const std::string& id : plan_.event_plugins) {
    instances_[id]->subscribe(bus_);
  }

  state_.running = true;
  state_.save(state_path_);
}

bool ExperimentRunner::activity_allows() const {
  return !manifest_.wake_policy.active_only || active_;
}

void ExperimentRunner::fire_timer(Timer& timer, int64_t fire_time) {
  if (sim_clock_) sim_clock_->set(fire_time);
  int64_t now = clock_.now_ms();
  if (timer.precise && now - fire_time > options_.precise_tolerance_ms) {
    state_.plugins[timer.plugin_id].missed_deadlines++;
  }
  if (activity_allows()) {
    auto& instance = *instances_[timer.plugin_id];
    std::vector<model::json> payloads = instance.poll(fire_time);
    for (const model::json& p : payloads) reporter_->emit(timer.plugin_id, p);
    PluginCounters& c = state_.plugins[timer.plugin_id];
    c.polls_executed++;
    c.last_poll_ts = fire_time;
  }
  timer.next_due += timer.interval_ms;
}

void ExperimentRunner::advance_to(int64_t t) {
  std::lock_guard lock(mu_);
  if (!running_) return;
  for (;;) {
    // Earliest pending deadline: a poll timer or a replayed trace event.
    Timer* next_timer = nullptr;
    for (Timer& timer : timers_) {
      if (!next_timer || timer.next_due < next_timer->next_due) next_timer = &timer;
    }
    bool have_trace = next_trace_event_ < trace_events_.size();
    int64_t trace_ts = have_trace ? trace_events_[next_trace_event_].first
                                  : std::numeric_limits<int64_t>::max();
    int64_t timer_ts = next_timer ? next_timer->next_due : std::numeric_limits<int64_t>::max();

    if (std::min(trace_ts, timer_ts) > t) break;
    if (trace_ts <= timer_ts) {
      if (sim_clock_) sim_clock_->set(trace_ts);
      bool active = trace_events_[next_trace_event_].second;
      ++next_trace_event_;
      bus_.publish({"activity", trace_ts, model::json{{"state", active ? "active" : "idle"}}});
    } else {
      if (!sim_clock_ && t - next_timer->next_due >= next_timer->interval_ms) {
        // Running late by whole periods: skip them (no burst catch-up) and
        // record the misses.
        int64_t skipped = (t - next_timer->next_due) / next_timer->interval_ms;
        state_.plugins[next_timer->plugin_id].missed_deadlines += skipped;
        next_timer->next_due += skipped * next_timer->interval_ms;
      }
      fire_timer(*next_timer, next_timer->next_due);
    }
  }
  if (sim_clock_ && sim_clock_->now_ms() < t) sim_clock_->set(t);
}

RunState ExperimentRunner::stop() {
  std::lock_guard lock(mu_);
  if (!running_) return state_;  // idempotent
  running_ = false;
  for (const std::string& id : plan_.event_plugins) {
    instances_[id]->unsubscribe();
  }
  if (activity_sub_id_ != 0) {
    bus_.unsubscribe(activity_sub_id_);
    activity_sub_id_ = 0;
  }
  timers_.clear();
  storage_.flush();
  storage_.seal_chunk();
  state_.running = false;
  state_.save(state_path_);
  return state_;
}

RunState ExperimentRunner::status() const {
  std::lock_guard lock(mu_);
  return state_;
}

bool ExperimentRunner::running() const {
  std::lock_guard lock(mu_);
  return running_;
}

int64_t ExperimentRunner::next_deadline() const {
  std::lock_guard lock(mu_);
  int64_t best = std::numeric_limits<int64_t>::max();
  for (const Timer& timer : timers_) best = std::min(best, timer.next_due);
  if (next_trace_event_ < trace_events_.size()) {
    best = std::min(best, trace_events_[next_trace_event_].first);
  }
  return best;
}

}  // namespace probekit::sched
