#include "builtin.hpp"

namespace probekit::plugins::builtin {

using model::Capability;
using model::PluginKind;

namespace {

// Emits one record per activity transition. Activity events come from the
// bus; the scheduler replays trace files onto the bus as "activity" events
// with data.state = "active" | "idle".
class ActivityState : public BusEventPlugin {
 public:
  using BusEventPlugin::BusEventPlugin;

 protected:
  void on_event(const HostEvent& event) override {
    if (event.type != "activity") return;
    std::string state = event.data.value("state", "");
    if (state != "active" && state != "idle") return;
    if (last_state_ == state) return;
    std::string prev = last_state_;
    last_state_ = state;
    reporter().emit(descriptor().plugin_id,
                    model::json{{"state", state}, {"previous", prev}});
  }

 private:
  std::string last_state_;
};

}  // namespace

PluginDescriptor activity_state_descriptor() {
  PluginDescriptor d;
  d.plugin_id = "activity_state";
  d.kind = PluginKind::event;
  d.author = "probekit";
  d.description = "Host activity transitions (active/idle)";
  d.required_capabilities = {Capability::ACTIVITY_STATE};
  d.option_schema = {
      {"trace_file", OptionType::text, model::OptionValue(std::string("")), {}, {}, {}},
  };
  return d;
}

std::unique_ptr<PluginInstance> make_activity_state(const Options& options, Reporter& reporter) {
  return std::make_unique<ActivityState>(activity_state_descriptor(), options, reporter);
}

}  // namespace probekit::plugins::builtin
