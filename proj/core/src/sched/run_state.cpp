#include "probekit/sched/run_state.hpp"

#include <filesystem>

#include "probekit/util/fs.hpp"

namespace probekit::sched {

model::json RunState::to_json() const {
  model::json plugins_j = model::json::object();
  for (const auto& [id, c] : plugins) {
    plugins_j[id] = {{"records_emitted", c.records_emitted},
                     {"polls_executed", c.polls_executed},
                     {"last_poll_ts", c.last_poll_ts},
                     {"missed_deadlines", c.missed_deadlines}};
  }
  return model::json{{"experiment_id", experiment_id},
                     {"started_ts", started_ts},
                     {"plugins", plugins_j},
                     {"running", running}};
}

RunState RunState::from_json(const model::json& j) {
  RunState s;
  s.experiment_id = j.at("experiment_id").get<std::string>();
  s.started_ts = j.at("started_ts").get<int64_t>();
  s.running = j.at("running").get<bool>();
  for (const auto& [id, cj] : j.at("plugins").items()) {
    PluginCounters c;
    c.records_emitted = cj.at("records_emitted").get<int64_t>();
    c.polls_executed = cj.at("polls_executed").get<int64_t>();
    c.last_poll_ts = cj.at("last_poll_ts").get<int64_t>();
    c.missed_deadlines = cj.at("missed_deadlines").get<int64_t>();
    s.plugins[id] = c;
  }
  return s;
}

void RunState::save(const std::filesystem::path& path) const {
  util::ensure_private_dir(path.parent_path());
  util::atomic_write_file(path, to_json().dump());
}

RunState RunState::load(const std::filesystem::path& path) {
  try {
    return from_json(model::json::parse(util::read_file(path)));
  } catch (...) {
    return RunState{};
  }
}

}  // namespace probekit::sched
