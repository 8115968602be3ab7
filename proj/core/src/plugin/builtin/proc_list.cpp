#include <cctype>
#include <filesystem>

#include "builtin.hpp"

namespace probekit::plugins::builtin {

using model::Capability;
using model::PluginKind;

namespace {

class ProcList : public PluginInstance {
 public:
  using PluginInstance::PluginInstance;

  std::vector<model::json> poll(int64_t) override {
    std::error_code ec;
    std::filesystem::directory_iterator it("/proc", ec);
    if (ec) return {source_unavailable("/proc unreadable")};
    int64_t count = 0;
    for (const auto& entry : it) {
      std::string name = entry.path().filename().string();
      if (!name.empty() && std::isdigit(static_cast<unsigned char>(name[0]))) ++count;
    }
    return {model::json{{"process_count", count}}};
  }
};

}  // namespace

PluginDescriptor proc_list_descriptor() {
  PluginDescriptor d;
  d.plugin_id = "proc_list";
  d.kind = PluginKind::polling;
  d.author = "probekit";
  d.description = "Running process count";
  d.required_capabilities = {Capability::PROC_LIST};
  d.default_interval_ms = 30000;
  return d;
}

std::unique_ptr<PluginInstance> make_proc_list(const Options& options, Reporter& reporter) {
  return std::make_unique<ProcList>(proc_list_descriptor(), options, reporter);
}

}  // namespace probekit::plugins::builtin
