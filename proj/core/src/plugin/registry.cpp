#include "probekit/plugin/registry.hpp"

#include <sstream>

#include "builtin/builtin.hpp"

namespace probekit::plugins {

using model::OptionValue;

std::string option_type_name(OptionType t) {
  switch (t) {
    case OptionType::boolean: return "boolean";
    case OptionType::integer: return "integer";
    case OptionType::decimal: return "decimal";
    case OptionType::text: return "text";
  }
  return "?";
}

static bool type_matches(OptionType t, const OptionValue& v) {
  switch (t) {
    case OptionType::boolean: return std::holds_alternative<bool>(v);
    case OptionType::integer: return std::holds_alternative<int64_t>(v);
    // integers are acceptable where decimals are expected
    case OptionType::decimal:
      return std::holds_alternative<double>(v) || std::holds_alternative<int64_t>(v);
    case OptionType::text: return std::holds_alternative<std::string>(v);
  }
  return false;
}

static double numeric_value(const OptionValue& v) {
  if (std::holds_alternative<int64_t>(v)) return static_cast<double>(std::get<int64_t>(v));
  return std::get<double>(v);
}

std::string check_option(const OptionSpec& spec, const OptionValue& value) {
  if (!type_matches(spec.value_type, value)) {
    return "option '" + spec.name + "' must be " + option_type_name(spec.value_type);
  }
  if (spec.value_type == OptionType::integer || spec.value_type == OptionType::decimal) {
    double x = numeric_value(value);
    if (spec.min && x < *spec.min) {
      return "option '" + spec.name + "' below minimum";
    }
    if (spec.max && x > *spec.max) {
      return "option '" + spec.name + "' above maximum";
    }
  }
  if (spec.value_type == OptionType::text && spec.allowed_values) {
    if (!spec.allowed_values->count(std::get<std::string>(value))) {
      return "option '" + spec.name + "' not an allowed value";
    }
  }
  return "";
}

std::vector<std::string> check_options(const PluginDescriptor& desc,
                                       const std::map<std::string, OptionValue>& options) {
  std::vector<std::string> errors;
  for (const auto& [name, value] : options) {
    const OptionSpec* spec = nullptr;
    for (const auto& s : desc.option_schema) {
      if (s.name == name) {
        spec = &s;
        break;
      }
    }
    if (!spec) {
      errors.push_back("unknown option '" + name + "'");
      continue;
    }
    std::string err = check_option(*spec, value);
    if (!err.empty()) errors.push_back(err);
  }
  return errors;
}

std::map<std::string, OptionValue> resolve_options(
    const PluginDescriptor& desc, const std::map<std::string, OptionValue>& options) {
  std::map<std::string, OptionValue> out;
  for (const auto& spec : desc.option_schema) {
    auto it = options.find(spec.name);
    out[spec.name] = it != options.end() ? it->second : spec.default_value;
  }
  return out;
}

model::json descriptor_to_json(const PluginDescriptor& desc) {
  model::json caps = model::json::array();
  for (model::Capability c : desc.required_capabilities) caps.push_back(model::capability_name(c));
  model::json schema = model::json::array();
  for (const OptionSpec& s : desc.option_schema) {
    model::json oj{{"name", s.name},
                   {"type", option_type_name(s.value_type)},
                   {"default", model::option_value_to_json(s.default_value)}};
    if (s.min) oj["min"] = *s.min;
    if (s.max) oj["max"] = *s.max;
    if (s.allowed_values) oj["allowed_values"] = *s.allowed_values;
    schema.push_back(oj);
  }
  model::json j{{"plugin_id", desc.plugin_id},
                {"kind", model::plugin_kind_name(desc.kind)},
                {"author", desc.author},
                {"description", desc.description},
                {"required_capabilities", caps},
                {"option_schema", schema}};
  if (desc.kind == model::PluginKind::polling) j["default_interval_ms"] = desc.default_interval_ms;
  return j;
}

// --- PluginInstance base ---

std::vector<model::json> PluginInstance::poll(int64_t) {
  throw std::logic_error("poll() called on event plugin " + descriptor_.plugin_id);
}

void PluginInstance::subscribe(EventBus&) {
  throw std::logic_error("subscribe() called on polling plugin " + descriptor_.plugin_id);
}

void PluginInstance::unsubscribe() {}

bool PluginInstance::opt_bool(const std::string& name) const {
  return std::get<bool>(options_.at(name));
}

int64_t PluginInstance::opt_int(const std::string& name) const {
  const OptionValue& v = options_.at(name);
  if (std::holds_alternative<double>(v)) return static_cast<int64_t>(std::get<double>(v));
  return std::get<int64_t>(v);
}

double PluginInstance::opt_decimal(const std::string& name) const {
  return numeric_value(options_.at(name));
}

std::string PluginInstance::opt_text(const std::string& name) const {
  return std::get<std::string>(options_.at(name));
}

model::json source_unavailable(const std::string& reason) {
  return model::json{{"error", "source-unavailable"}, {"reason", reason}};
}

// --- Registry ---

namespace {

struct BuiltinEntry {
  PluginDescriptor descriptor;
  std::unique_ptr<PluginInstance> (*factory)(const builtin::Options&, Reporter&);
};

const std::vector<BuiltinEntry>& builtins() {
  static const std::vector<BuiltinEntry> entries = [] {
    std::vector<BuiltinEntry> v;
    v.push_back({builtin::synth_sensor_descriptor(), builtin::make_synth_sensor});
    v.push_back({builtin::sys_cpu_descriptor(), builtin::make_sys_cpu});
    v.push_back({builtin::sys_mem_descriptor(), builtin::make_sys_mem});
    v.push_back({builtin::net_traffic_descriptor(), builtin::make_net_traffic});
    v.push_back({builtin::proc_list_descriptor(), builtin::make_proc_list});
    v.push_back({builtin::fs_events_descriptor(), builtin::make_fs_events});
    v.push_back({builtin::clock_events_descriptor(), builtin::make_clock_events});
    v.push_back({builtin::activity_state_descriptor(), builtin::make_activity_state});
    return v;
  }();
  return entries;
}

}  // namespace

const std::vector<PluginDescriptor>& Registry::describe_all() {
  static const std::vector<PluginDescriptor> descs = [] {
    std::vector<PluginDescriptor> v;
    for (const auto& e : builtins()) v.push_back(e.descriptor);
    return v;
  }();
  return descs;
}

const PluginDescriptor* Registry::find(const std::string& plugin_id) {
  for (const auto& d : describe_all()) {
    if (d.plugin_id == plugin_id) return &d;
  }
  return nullptr;
}

std::unique_ptr<PluginInstance> Registry::instantiate(
    const std::string& plugin_id, const std::map<std::string, OptionValue>& options,
    Reporter& reporter) {
  for (const auto& e : builtins()) {
    if (e.descriptor.plugin_id != plugin_id) continue;
    auto errors = check_options(e.descriptor, options);
    if (!errors.empty()) {
      std::ostringstream msg;
      msg << plugin_id << ":";
      for (const auto& err : errors) msg << " " << err << ";";
      throw OptionError(msg.str());
    }
    return e.factory(resolve_options(e.descriptor, options), reporter);
  }
  throw UnknownPluginError("unknown plugin: " + plugin_id);
}

}  // namespace probekit::plugins
