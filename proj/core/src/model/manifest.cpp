#include "probekit/model/manifest.hpp"

#include <algorithm>
#include <set>

namespace probekit::model {

namespace {

json wake_policy_to_json(const GlobalWakePolicy& p) {
  return json{{"allow_wakelocks", p.allow_wakelocks}, {"active_only", p.active_only}};
}

GlobalWakePolicy wake_policy_from_json(const json& j) {
  GlobalWakePolicy p;
  p.allow_wakelocks = j.at("allow_wakelocks").get<bool>();
  p.active_only = j.at("active_only").get<bool>();
  return p;
}

json upload_policy_to_json(const UploadPolicy& p) {
  return json{{"enabled", p.enabled},
              {"server_url", p.server_url},
              {"unmetered_only", p.unmetered_only},
              {"period_minutes", p.period_minutes},
              {"delete_after_ack", p.delete_after_ack}};
}

UploadPolicy upload_policy_from_json(const json& j) {
  UploadPolicy p;
  p.enabled = j.at("enabled").get<bool>();
  p.server_url = j.at("server_url").get<std::string>();
  p.unmetered_only = j.at("unmetered_only").get<bool>();
  p.period_minutes = j.at("period_minutes").get<int64_t>();
  p.delete_after_ack = j.at("delete_after_ack").get<bool>();
  return p;
}

json plugin_config_to_json(const PluginConfig& c) {
  json j;
  j["plugin_id"] = c.plugin_id;
  j["kind"] = plugin_kind_name(c.kind);
  if (c.interval_ms) j["interval_ms"] = *c.interval_ms;
  json opts = json::object();
  for (const auto& [name, value] : c.options) opts[name] = option_value_to_json(value);
  j["options"] = opts;
  return j;
}

PluginConfig plugin_config_from_json(const json& j) {
  PluginConfig c;
  c.plugin_id = j.at("plugin_id").get<std::string>();
  auto kind = plugin_kind_from_name(j.at("kind").get<std::string>());
  if (!kind) throw ManifestError("unknown plugin kind: " + j.at("kind").dump());
  c.kind = *kind;
  if (j.contains("interval_ms")) c.interval_ms = j.at("interval_ms").get<int64_t>();
  if (j.contains("options")) {
    for (const auto& [name, value] : j.at("options").items()) {
      auto v = option_value_from_json(value);
      if (!v) throw ManifestError("option '" + name + "' is not a scalar");
      c.options.emplace(name, *v);
    }
  }
  return c;
}

void check_structural(const ExperimentManifest& m) {
  if (m.schema_version != kManifestSchemaVersion) {
    throw ManifestError("unsupported schema_version " + std::to_string(m.schema_version));
  }
  if (m.created_ts <= 0) throw ManifestError("created_ts must be > 0");
  if (m.plugin_configs.empty()) throw ManifestError("plugin_configs must be non-empty");
  std::set<std::string> ids;
  for (const PluginConfig& c : m.plugin_configs) {
    if (!ids.insert(c.plugin_id).second) {
      throw ManifestError("duplicate plugin_id: " + c.plugin_id);
    }
    if (c.kind == PluginKind::polling) {
      if (!c.interval_ms) throw ManifestError("polling plugin missing interval_ms: " + c.plugin_id);
      if (*c.interval_ms < kMinPollingIntervalMs) {
        throw ManifestError("interval_ms below minimum for " + c.plugin_id);
      }
    } else if (c.interval_ms) {
      throw ManifestError("event plugin must not set interval_ms: " + c.plugin_id);
    }
  }
}

}  // namespace

json manifest_to_json(const ExperimentManifest& m) {
  json j;
  j["experiment_id"] = m.experiment_id;
  j["name"] = m.name;
  j["version"] = m.version;
  j["author_name"] = m.author_name;
  j["author_key_fingerprint"] = m.author_key_fingerprint;
  j["description"] = m.description;
  j["created_ts"] = m.created_ts;
  json plugins = json::array();
  for (const PluginConfig& c : m.plugin_configs) plugins.push_back(plugin_config_to_json(c));
  j["plugin_configs"] = plugins;
  json caps = json::array();
  for (Capability c : m.capabilities) caps.push_back(capability_name(c));
  j["capabilities"] = caps;
  j["wake_policy"] = wake_policy_to_json(m.wake_policy);
  j["upload_policy"] = upload_policy_to_json(m.upload_policy);
  j["schema_version"] = m.schema_version;
  return j;
}

ExperimentManifest manifest_from_json(const json& j) {
  ExperimentManifest m;
  try {
    m.experiment_id = j.at("experiment_id").get<std::string>();
    m.name = j.at("name").get<std::string>();
    m.version = j.at("version").get<std::string>();
    m.author_name = j.at("author_name").get<std::string>();
    m.author_key_fingerprint = j.at("author_key_fingerprint").get<std::string>();
    m.description = j.at("description").get<std::string>();
    m.created_ts = j.at("created_ts").get<int64_t>();
    for (const json& pj : j.at("plugin_configs")) {
      m.plugin_configs.push_back(plugin_config_from_json(pj));
    }
    for (const json& cj : j.at("capabilities")) {
      auto cap = capability_from_name(cj.get<std::string>());
      if (!cap) throw ManifestError("unknown capability: " + cj.get<std::string>());
      m.capabilities.insert(*cap);
    }
    m.wake_policy = wake_policy_from_json(j.at("wake_policy"));
    m.upload_policy = upload_policy_from_json(j.at("upload_policy"));
    m.schema_version = j.at("schema_version").get<int>();
  } catch (const json::exception& e) {
    throw ManifestError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

ExperimentManifest parse_manifest(const std::string& bytes) {
  json j;
  try {
    j = json::parse(bytes);
  } catch (const json::exception& e) {
    throw ManifestError(std::string("malformed manifest syntax: ") + e.what());
  }
  ExperimentManifest m = manifest_from_json(j);
  check_structural(m);
  return m;
}

std::string canonicalize_manifest(const ExperimentManifest& m) {
  // nlohmann objects are key-sorted; dump() emits no whitespace and numbers
  // in shortest round-trip form.
  return manifest_to_json(m).dump();
}

std::vector<Violation> validate_manifest(const ExperimentManifest& m,
                                         const std::vector<plugins::PluginDescriptor>& registry) {
  std::vector<Violation> out;
  try {
    check_structural(m);
  } catch (const ManifestError& e) {
    out.push_back({"structural", e.what()});
  }

  std::set<Capability> required;
  for (const PluginConfig& c : m.plugin_configs) {
    const plugins::PluginDescriptor* desc = nullptr;
    for (const auto& d : registry) {
      if (d.plugin_id == c.plugin_id) {
        desc = &d;
        break;
      }
    }
    if (!desc) {
      out.push_back({"unknown-plugin", "unknown plugin: " + c.plugin_id});
      continue;
    }
    if (desc->kind != c.kind) {
      out.push_back({"kind-mismatch",
                     "plugin " + c.plugin_id + " is " + plugin_kind_name(desc->kind) +
                         " but configured as " + plugin_kind_name(c.kind)});
    }
    for (const std::string& err : plugins::check_options(*desc, c.options)) {
      out.push_back({"bad-option", c.plugin_id + ": " + err});
    }
    required.insert(desc->required_capabilities.begin(), desc->required_capabilities.end());
  }

  for (Capability c : m.capabilities) {
    if (!required.count(c)) {
      out.push_back({"over-provisioned",
                     "capability " + capability_name(c) + " not required by any selected plugin"});
    }
  }
  for (Capability c : required) {
    if (!m.capabilities.count(c)) {
      out.push_back({"under-provisioned",
                     "capability " + capability_name(c) + " required but not declared"});
    }
  }

  if (!m.wake_policy.allow_wakelocks) {
    for (const PluginConfig& c : m.plugin_configs) {
      if (c.kind == PluginKind::polling && c.interval_ms && *c.interval_ms <= 10000) {
        out.push_back({"wake-policy-conflict",
                       "plugin " + c.plugin_id + " needs precise timers (interval " +
                           std::to_string(*c.interval_ms) + " ms) but wakelocks are disallowed"});
      }
    }
  }

  if (m.upload_policy.enabled) {
    if (m.upload_policy.server_url.empty()) {
      out.push_back({"bad-upload-policy", "upload enabled but server_url is empty"});
    }
    if (m.upload_policy.period_minutes < 1) {
      out.push_back({"bad-upload-policy", "upload period_minutes must be >= 1"});
    }
  }
  return out;
}

}  // namespace probekit::model
