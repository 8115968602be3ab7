#include "probekit/plugin/plugin.hpp"

namespace probekit::plugins {

int EventBus::subscribe(Callback cb) {
  std::lock_guard lock(mu_);
  int id = next_id_++;
  subs_[id] = std::move(cb);
  return id;
}

void EventBus::unsubscribe(int id) {
  std::lock_guard lock(mu_);
  subs_.erase(id);
}

void EventBus::publish(const HostEvent& event) {
  std::vector<Callback> cbs;
  {
    std::lock_guard lock(mu_);
    cbs.reserve(subs_.size());
    for (auto& [id, cb] : subs_) cbs.push_back(cb);
  }
  for (auto& cb : cbs) cb(event);
}

BusEventPlugin::~BusEventPlugin() { BusEventPlugin::unsubscribe(); }

void BusEventPlugin::subscribe(EventBus& bus) {
  if (bus_ == &bus) return;  // double-subscribe is idempotent
  unsubscribe();
  bus_ = &bus;
  sub_id_ = bus.subscribe([this](const HostEvent& e) { on_event(e); });
}

void BusEventPlugin::unsubscribe() {
  if (bus_) {
    bus_->unsubscribe(sub_id_);
    bus_ = nullptr;
    sub_id_ = 0;
  }
}

}  // namespace probekit::plugins
