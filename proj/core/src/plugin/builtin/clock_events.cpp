#include "builtin.hpp"

namespace probekit::plugins::builtin {

using model::Capability;
using model::PluginKind;

namespace {

// Reacts to injected clock-related bus events (timezone and wall-clock
// adjustments).
class ClockEvents : public BusEventPlugin {
 public:
  using BusEventPlugin::BusEventPlugin;

 protected:
  void on_event(const HostEvent& event) override {
    // events may carry no data at all
    const model::json data = event.data.is_object() ? event.data : model::json::object();
    if (event.type == "timezone_changed") {
      reporter().emit(descriptor().plugin_id,
                      model::json{{"event", "timezone_changed"},
                                  {"old_zone", data.value("old_zone", "")},
                                  {"new_zone", data.value("new_zone", "")}});
    } else if (event.type == "time_set") {
      reporter().emit(descriptor().plugin_id,
                      model::json{{"event", "time_set"},
                                  {"old_ts_ms", data.value("old_ts_ms", int64_t{0})},
                                  {"new_ts_ms", data.value("new_ts_ms", int64_t{0})}});
    }
  }
};

}  // namespace

PluginDescriptor clock_events_descriptor() {
  PluginDescriptor d;
  d.plugin_id = "clock_events";
  d.kind = PluginKind::event;
  d.author = "probekit";
  d.description = "Timezone and wall-clock change events";
  d.required_capabilities = {Capability::CLOCK_EVENTS};
  return d;
}

std::unique_ptr<PluginInstance> make_clock_events(const Options& options, Reporter& reporter) {
  return std::make_unique<ClockEvents>(clock_events_descriptor(), options, reporter);
}

}  // namespace probekit::plugins::builtin
