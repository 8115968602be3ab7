#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "probekit/plugin/descriptor.hpp"

namespace probekit::plugins {

using model::json;

// Synthetic host event fed to event plugins (timezone changes, activity
// transitions, replayed traces).
struct HostEvent {
  std::string type;
  int64_t ts_ms = 0;
  json data;
};

class EventBus {
 public:
  using Callback = std::function<void(const HostEvent&)>;

  // Returns a subscription id.
  int subscribe(Callback cb);
  void unsubscribe(int id);
  void publish(const HostEvent& event);

 private:
  std::mutex mu_;
  int next_id_ = 1;
  std::map<int, Callback> subs_;
};

class EmissionRejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sink plugins emit into. Implementations must accept emissions from
// multiple instances concurrently and enforce the capability grant: an
// emission from a plugin whose required capabilities are not all granted is
// rejected.
class Reporter {
 public:
  virtual ~Reporter() = default;
  virtual void emit(const std::string& plugin_id, const json& payload) = 0;
  virtual void emit_blob(const std::string& plugin_id, const std::string& name,
                         const std::vector<uint8_t>& bytes) = 0;
};

class PluginInstance {
 public:
  PluginInstance(PluginDescriptor descriptor, std::map<std::string, model::OptionValue> options,
                 Reporter& reporter)
      : descriptor_(std::move(descriptor)), options_(std::move(options)), reporter_(&reporter) {}
  virtual ~PluginInstance() = default;

  const PluginDescriptor& descriptor() const { return descriptor_; }
  model::PluginKind kind() const { return descriptor_.kind; }
  const std::map<std::string, model::OptionValue>& options() const { return options_; }

  // Polling instances only. Returns structured payloads for the current
  // reading; a source-unavailable condition is reported as a payload with
  // an "error" field, never thrown.
  virtual std::vector<json> poll(int64_t now_ms);

  // Event instances only. Idempotent.
  virtual void subscribe(EventBus& bus);
  virtual void unsubscribe();

 protected:
  Reporter& reporter() { return *reporter_; }

  bool opt_bool(const std::string& name) const;
  int64_t opt_int(const std::string& name) const;
  double opt_decimal(const std::string& name) const;
  std::string opt_text(const std::string& name) const;

 private:
  PluginDescriptor descriptor_;
  std::map<std::string, model::OptionValue> options_;
  Reporter* reporter_;
};

// Base for bus-driven event plugins; handles (un)subscribe bookkeeping.
class BusEventPlugin : public PluginInstance {
 public:
  using PluginInstance::PluginInstance;
  ~BusEventPlugin() override;

  void subscribe(EventBus& bus) final;
  void unsubscribe() final;

 protected:
  virtual void on_event(const HostEvent& event) = 0;

 private:
  EventBus* bus_ = nullptr;
  int sub_id_ = 0;
};

json source_unavailable(const std::string& reason);

}  // namespace probekit::plugins
