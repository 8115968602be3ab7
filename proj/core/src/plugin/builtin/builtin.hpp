#pragma once

#include <memory>

#include "probekit/plugin/plugin.hpp"

// Internal factory surface for the compiled-in collectors.
namespace probekit::plugins::builtin {

using Options = std::map<std::string, model::OptionValue>;

PluginDescriptor synth_sensor_descriptor();
std::unique_ptr<PluginInstance> make_synth_sensor(const Options& options, Reporter& reporter);

PluginDescriptor sys_cpu_descriptor();
std::unique_ptr<PluginInstance> make_sys_cpu(const Options& options, Reporter& reporter);

PluginDescriptor sys_mem_descriptor();
std::unique_ptr<PluginInstance> make_sys_mem(const Options& options, Reporter& reporter);

PluginDescriptor net_traffic_descriptor();
std::unique_ptr<PluginInstance> make_net_traffic(const Options& options, Reporter& reporter);

PluginDescriptor proc_list_descriptor();
std::unique_ptr<PluginInstance> make_proc_list(const Options& options, Reporter& reporter);

PluginDescriptor fs_events_descriptor();
std::unique_ptr<PluginInstance> make_fs_events(const Options& options, Reporter& reporter);

PluginDescriptor clock_events_descriptor();
std::unique_ptr<PluginInstance> make_clock_events(const Options& options, Reporter& reporter);

PluginDescriptor activity_state_descriptor();
std::unique_ptr<PluginInstance> make_activity_state(const Options& options, Reporter& reporter);

}  // namespace probekit::plugins::builtin
