#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "probekit/model/types.hpp"

namespace probekit::plugins {

enum class OptionType { boolean, integer, decimal, text };
std::string option_type_name(OptionType t);

struct OptionSpec {
  std::string name;
  OptionType value_type = OptionType::text;
  model::OptionValue default_value;
  std::optional<double> min;  // numeric types only
  std::optional<double> max;
  std::optional<std::set<std::string>> allowed_values;  // text only
};

struct PluginDescriptor {
  std::string plugin_id;
  model::PluginKind kind = model::PluginKind::polling;
  std::string author;
  std::string description;
  std::set<model::Capability> required_capabilities;
  std::vector<OptionSpec> option_schema;
  int64_t default_interval_ms = 1000;  // polling only
};

// Empty string on success, otherwise a human-readable reason.
std::string check_option(const OptionSpec& spec, const model::OptionValue& value);

// Validates names and values against the schema. Unknown option names are
// errors; missing options are fine (defaults apply at instantiation).
std::vector<std::string> check_options(const PluginDescriptor& desc,
                                       const std::map<std::string, model::OptionValue>& options);

// Options with defaults filled in for anything not supplied.
std::map<std::string, model::OptionValue> resolve_options(
    const PluginDescriptor& desc, const std::map<std::string, model::OptionValue>& options);

// Canonical JSON of a descriptor; digested into plugins.lock.
model::json descriptor_to_json(const PluginDescriptor& desc);

}  // namespace probekit::plugins
