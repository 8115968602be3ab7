#pragma once

#include <memory>
#include <vector>

#include "probekit/plugin/plugin.hpp"

namespace probekit::plugins {

class UnknownPluginError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OptionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Compiled-in collector registry. Immutable and shareable.
class Registry {
 public:
  // Every built-in descriptor exactly once, in stable order.
  static const std::vector<PluginDescriptor>& describe_all();

  static const PluginDescriptor* find(const std::string& plugin_id);

  // Missing options take schema defaults. Throws UnknownPluginError or
  // OptionError; no records are emitted by instantiation itself.
  static std::unique_ptr<PluginInstance> instantiate(
      const std::string& plugin_id, const std::map<std::string, model::OptionValue>& options,
      Reporter& reporter);
};

}  // namespace probekit::plugins
