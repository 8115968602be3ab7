#include <fstream>
#include <sstream>

#include "builtin.hpp"

namespace probekit::plugins::builtin {

using model::Capability;
using model::PluginKind;

namespace {

class SysCpu : public PluginInstance {
 public:
  using PluginInstance::PluginInstance;

  std::vector<model::json> poll(int64_t) override {
    std::ifstream in("/proc/stat");
    if (!in) return {source_unavailable("/proc/stat unreadable")};
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind("cpu ", 0) != 0) continue;
      std::istringstream ss(line);
      std::string tag;
      uint64_t user = 0, nice = 0, system = 0, idle = 0, iowait = 0, irq = 0, softirq = 0;
      ss >> tag >> user >> nice >> system >> idle >> iowait >> irq >> softirq;
      return {model::json{{"user", user},
                          {"nice", nice},
                          {"system", system},
                          {"idle", idle},
                          {"iowait", iowait},
                          {"irq", irq},
                          {"softirq", softirq}}};
    }
    return {source_unavailable("no aggregate cpu line in /proc/stat")};
  }
};

}  // namespace

PluginDescriptor sys_cpu_descriptor() {
  PluginDescriptor d;
  d.plugin_id = "sys_cpu";
  d.kind = PluginKind::polling;
  d.author = "probekit";
  d.description = "Aggregate CPU time counters";
  d.required_capabilities = {Capability::SYS_CPU};
  d.default_interval_ms = 5000;
  return d;
}

std::unique_ptr<PluginInstance> make_sys_cpu(const Options& options, Reporter& reporter) {
  return std::make_unique<SysCpu>(sys_cpu_descriptor(), options, reporter);
}

}  // namespace probekit::plugins::builtin
