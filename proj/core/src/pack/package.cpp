#include "probekit/pack/package.hpp"

#include <sstream>

#include "probekit/plugin/registry.hpp"
#include "probekit/util/fs.hpp"
#include "probekit/util/hex.hpp"
#include "probekit/util/uuid.hpp"
#include "probekit/util/zipfile.hpp"

namespace probekit::pack {

using model::json;

BuildConfig BuildConfig::from_json(const json& j) {
  BuildConfig c;
  try {
    c.name = j.at("name").get<std::string>();
    c.version = j.value("version", std::string("1.0"));
    c.author_name = j.value("author_name", std::string(""));
    c.description = j.value("description", std::string(""));
    for (const json& pj : j.at("plugins")) {
      model::PluginConfig pc;
      pc.plugin_id = pj.at("plugin_id").get<std::string>();
      if (pj.contains("interval_ms")) {
        pc.kind = model::PluginKind::polling;
        pc.interval_ms = pj.at("interval_ms").get<int64_t>();
      } else {
        const plugins::PluginDescriptor* d = nullptr;
        for (const auto& desc : plugins::Registry::describe_all()) {
          if (desc.plugin_id == pc.plugin_id) d = &desc;
        }
        // Unknown plugins fall out during validation; default to event so
        // the config still parses.
        if (d && d->kind == model::PluginKind::polling) {
          pc.kind = model::PluginKind::polling;
          pc.interval_ms = d->default_interval_ms;
        } else {
          pc.kind = model::PluginKind::event;
        }
      }
      if (pj.contains("options")) {
        for (const auto& [name, value] : pj.at("options").items()) {
          auto v = model::option_value_from_json(value);
          if (!v) throw BuildError("option '" + name + "' is not a scalar");
          pc.options.emplace(name, *v);
        }
      }
      c.plugin_configs.push_back(std::move(pc));
    }
    if (j.contains("capabilities")) {
      std::set<model::Capability> caps;
      for (const json& cj : j.at("capabilities")) {
        auto cap = model::capability_from_name(cj.get<std::string>());
        if (!cap) throw BuildError("unknown capability: " + cj.get<std::string>());
        caps.insert(*cap);
      }
      c.declared_capabilities = caps;
    }
    if (j.contains("wake_policy")) {
      c.wake_policy.allow_wakelocks = j.at("wake_policy").value("allow_wakelocks", true);
      c.wake_policy.active_only = j.at("wake_policy").value("active_only", false);
    }
    if (j.contains("upload_policy")) {
      const json& up = j.at("upload_policy");
      c.upload_policy.enabled = up.value("enabled", false);
      c.upload_policy.server_url = up.value("server_url", std::string(""));
      c.upload_policy.unmetered_only = up.value("unmetered_only", true);
      c.upload_policy.period_minutes = up.value("period_minutes", int64_t{15});
      c.upload_policy.delete_after_ack = up.value("delete_after_ack", true);
    }
  } catch (const json::exception& e) {
    throw BuildError(std::string("malformed build config: ") + e.what());
  }
  return c;
}

BuildConfig BuildConfig::from_file(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(util::read_file(path));
  } catch (const json::exception& e) {
    throw BuildError(std::string("malformed build config: ") + e.what());
  }
  return from_json(j);
}

std::set<model::Capability> compute_capabilities(
    const std::vector<model::PluginConfig>& configs,
    const std::vector<plugins::PluginDescriptor>& registry) {
  std::set<model::Capability> caps;
  for (const model::PluginConfig& c : configs) {
    const plugins::PluginDescriptor* desc = nullptr;
    for (const auto& d : registry) {
      if (d.plugin_id == c.plugin_id) {
        desc = &d;
        break;
      }
    }
    if (!desc) throw BuildError("unknown plugin: " + c.plugin_id);
    caps.insert(desc->required_capabilities.begin(), desc->required_capabilities.end());
  }
  return caps;
}

std::string render_plugin_table(const std::vector<plugins::PluginDescriptor>& registry) {
  std::ostringstream out;
  out << "PLUGIN            KIND     CAPABILITIES              DEFAULT_INTERVAL  OPTIONS\n";
  for (const auto& d : registry) {
    std::string caps;
    for (model::Capability c : d.required_capabilities) {
      if (!caps.empty()) caps += ",";
      caps += model::capability_name(c);
    }
    std::string opts;
    for (const auto& s : d.option_schema) {
      if (!opts.empty()) opts += " ";
      opts += s.name + "=" + model::option_value_to_json(s.default_value).dump();
    }
    char line[512];
    std::snprintf(line, sizeof(line), "%-17s %-8s %-25s %-17s %s\n", d.plugin_id.c_str(),
                  model::plugin_kind_name(d.kind).c_str(), caps.c_str(),
                  d.kind == model::PluginKind::polling
                      ? (std::to_string(d.default_interval_ms) + " ms").c_str()
                      : "-",
                  opts.c_str());
    out << line;
  }
  return out.str();
}

static std::string make_lock_bytes(const std::vector<model::PluginConfig>& configs,
                                   const std::vector<plugins::PluginDescriptor>& registry) {
  json lock = json::array();
  for (const model::PluginConfig& c : configs) {
    for (const auto& d : registry) {
      if (d.plugin_id == c.plugin_id) {
        lock.push_back(json{{"plugin_id", d.plugin_id},
                            {"descriptor_digest", sha256_hex(plugins::descriptor_to_json(d).dump())}});
        break;
      }
    }
  }
  return lock.dump();
}

model::ExperimentManifest build_package(const BuildConfig& config,
                                        const std::vector<plugins::PluginDescriptor>& registry,
                                        const SigningKey& key,
                                        const std::filesystem::path& out_path,
                                        int64_t created_ts) {
  model::ExperimentManifest m;
  m.experiment_id = util::uuid4();
  m.name = config.name;
  m.version = config.version;
  m.author_name = config.author_name;
  m.author_key_fingerprint = key.fingerprint();
  m.description = config.description;
  m.created_ts = created_ts;
  m.plugin_configs = config.plugin_configs;
  m.capabilities = compute_capabilities(config.plugin_configs, registry);
  m.wake_policy = config.wake_policy;
  m.upload_policy = config.upload_policy;

  if (config.declared_capabilities && *config.declared_capabilities != m.capabilities) {
    std::vector<model::Violation> violations;
    for (model::Capability c : *config.declared_capabilities) {
      if (!m.capabilities.count(c)) {
        violations.push_back({"over-provisioned", "declared capability " +
                                                      model::capability_name(c) +
                                                      " is not required by any selected plugin"});
      }
    }
    for (model::Capability c : m.capabilities) {
      if (!config.declared_capabilities->count(c)) {
        violations.push_back({"under-provisioned", "required capability " +
                                                       model::capability_name(c) +
                                                       " missing from declared set"});
      }
    }
    throw BuildError("declared capabilities do not match the required union", violations);
  }

  std::vector<model::Violation> violations = model::validate_manifest(m, registry);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << "configuration invalid (" << violations.size() << " violation(s)):";
    for (const auto& v : violations) msg << "\n  [" << v.code << "] " << v.message;
    throw BuildError(msg.str(), violations);
  }

  std::string manifest_bytes = model::canonicalize_manifest(m);
  std::string lock_bytes = make_lock_bytes(config.plugin_configs, registry);
  std::string message = manifest_bytes + sha256_hex(lock_bytes);
  std::vector<uint8_t> sig = key.sign(message);
  json sig_json{{"algorithm", "ed25519"},
                {"public_key", util::to_hex(key.public_key)},
                {"signature", util::to_hex(sig)}};

  util::ZipWriter zip;
  zip.add_entry("manifest.json", manifest_bytes);
  zip.add_entry("plugins.lock", lock_bytes);
  zip.add_entry("signature.sig", sig_json.dump());
  zip.write_atomic(out_path);
  return m;
}

PackageContents load_package_bytes(const std::string& bytes) {
  util::ZipReader zip{std::string(bytes)};
  PackageContents pkg;
  if (!zip.has_entry("manifest.json")) throw BuildError("package missing manifest.json");
  pkg.manifest_bytes = zip.read("manifest.json");
  pkg.manifest = model::parse_manifest(pkg.manifest_bytes);
  if (!zip.has_entry("plugins.lock")) throw BuildError("package missing plugins.lock");
  pkg.lock_bytes = zip.read("plugins.lock");
  if (zip.has_entry("signature.sig")) pkg.signature_bytes = zip.read("signature.sig");
  return pkg;
}

PackageContents load_package(const std::filesystem::path& path) {
  return load_package_bytes(util::read_file(path));
}

std::string signature_message(const PackageContents& pkg) {
  return pkg.manifest_bytes + sha256_hex(pkg.lock_bytes);
}

std::optional<SigningKey> package_signer(const PackageContents& pkg) {
  if (!pkg.signature_bytes) return std::nullopt;
  try {
    json sig = json::parse(*pkg.signature_bytes);
    SigningKey key;
    key.public_key = util::from_hex(sig.at("public_key").get<std::string>());
    return key;
  } catch (...) {
    return std::nullopt;
  }
}

VerifyResult verify_package(const PackageContents& pkg,
                            const std::optional<SigningKey>& expected_key) {
  VerifyResult result;
  result.manifest = pkg.manifest;
  if (!pkg.signature_bytes) {
    result.reason = "unsigned";
    return result;
  }
  json sig_json;
  std::vector<uint8_t> pk, sig;
  try {
    sig_json = json::parse(*pkg.signature_bytes);
    if (sig_json.at("algorithm").get<std::string>() != "ed25519") {
      result.reason = "unsupported algorithm";
      return result;
    }
    pk = util::from_hex(sig_json.at("public_key").get<std::string>());
    sig = util::from_hex(sig_json.at("signature").get<std::string>());
  } catch (const std::exception&) {
    result.reason = "malformed signature";
    return result;
  }
  if (expected_key && expected_key->public_key != pk) {
    result.reason = "key mismatch";
    return result;
  }
  SigningKey key;
  key.public_key = pk;
  if (!key.verify(signature_message(pkg), sig)) {
    result.reason = "bad signature";
    return result;
  }
  if (pkg.manifest.author_key_fingerprint != key.fingerprint()) {
    result.reason = "fingerprint mismatch";
    return result;
  }
  result.ok = true;
  result.reason = "ok";
  return result;
}

VerifyResult verify_package_file(const std::filesystem::path& path,
                                 const std::optional<SigningKey>& expected_key) {
  PackageContents pkg;
  try {
    pkg = load_package(path);
  } catch (const std::exception& e) {
    VerifyResult r;
    r.reason = std::string("malformed package: ") + e.what();
    return r;
  }
  return verify_package(pkg, expected_key);
}

}  // namespace probekit::pack
