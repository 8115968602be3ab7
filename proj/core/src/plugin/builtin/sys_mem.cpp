#include <fstream>
#include <sstream>

#include "builtin.hpp"

namespace probekit::plugins::builtin {

using model::Capability;
using model::PluginKind;

namespace {

class SysMem : public PluginInstance {
 public:
  using PluginInstance::PluginInstance;

  std::vector<model::json> poll(int64_t) override {
    std::ifstream in("/proc/meminfo");
    if (!in) return {source_unavailable("/proc/meminfo unreadable")};
    uint64_t total_kb = 0, available_kb = 0;
    std::string line;
    while (std::getline(in, line)) {
      std::istringstream ss(line);
      std::string key;
      uint64_t value = 0;
      ss >> key >> value;
      if (key == "MemTotal:") total_kb = value;
      if (key == "MemAvailable:") available_kb = value;
    }
    if (total_kb == 0) return {source_unavailable("MemTotal missing")};
    uint64_t total = total_kb * 1024;
    uint64_t avail = available_kb * 1024;
    uint64_t used = avail <= total ? total - avail : 0;
    return {model::json{{"total_bytes", total}, {"used_bytes", used}}};
  }
};

}  // namespace

PluginDescriptor sys_mem_descriptor() {
  PluginDescriptor d;
  d.plugin_id = "sys_mem";
  d.kind = PluginKind::polling;
  d.author = "probekit";
  d.description = "Total and used memory";
  d.required_capabilities = {Capability::SYS_MEM};
  d.default_interval_ms = 5000;
  return d;
}

std::unique_ptr<PluginInstance> make_sys_mem(const Options& options, Reporter& reporter) {
  return std::make_unique<SysMem>(sys_mem_descriptor(), options, reporter);
}

}  // namespace probekit::plugins::builtin
