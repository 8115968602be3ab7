#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "probekit/model/types.hpp"

namespace probekit::sched {

struct PluginCounters {
  int64_t records_emitted = 0;
  int64_t polls_executed = 0;
  int64_t last_poll_ts = 0;
  int64_t missed_deadlines = 0;
};

struct RunState {
  std::string experiment_id;
  int64_t started_ts = 0;
  std::map<std::string, PluginCounters> plugins;
  bool running = false;

  model::json to_json() const;
  static RunState from_json(const model::json& j);

  void save(const std::filesystem::path& path) const;
  // Missing or corrupt files recover to a default (not running) state.
  static RunState load(const std::filesystem::path& path);
};

}  // namespace probekit::sched
