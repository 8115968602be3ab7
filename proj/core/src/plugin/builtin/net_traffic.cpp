#include <fstream>
#include <sstream>

#include "builtin.hpp"

namespace probekit::plugins::builtin {

using model::Capability;
using model::PluginKind;

namespace {

// Sums rx/tx byte counters across interfaces from /proc/net/dev.
class NetTraffic : public PluginInstance {
 public:
  using PluginInstance::PluginInstance;

  std::vector<model::json> poll(int64_t) override {
    std::ifstream in("/proc/net/dev");
    if (!in) return {source_unavailable("/proc/net/dev unreadable")};
    std::string line;
    std::getline(in, line);
    std::getline(in, line);  // two header lines
    uint64_t rx = 0, tx = 0;
    while (std::getline(in, line)) {
      auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      std::istringstream ss(line.substr(colon + 1));
      uint64_t f[16] = {};
      for (int i = 0; i < 16 && (ss >> f[i]); ++i) {
      }
      rx += f[0];  // rx bytes
      tx += f[8];  // tx bytes
    }
    return {model::json{{"net", {{"rx_bytes", rx}, {"tx_bytes", tx}}}}};
  }
};

}  // namespace

PluginDescriptor net_traffic_descriptor() {
  PluginDescriptor d;
  d.plugin_id = "net_traffic";
  d.kind = PluginKind::polling;
  d.author = "probekit";
  d.description = "Cumulative network rx/tx byte counters";
  d.required_capabilities = {Capability::NET_TRAFFIC};
  d.default_interval_ms = 5000;
  return d;
}

std::unique_ptr<PluginInstance> make_net_traffic(const Options& options, Reporter& reporter) {
  return std::make_unique<NetTraffic>(net_traffic_descriptor(), options, reporter);
}

}  // namespace probekit::plugins::builtin
