#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "probekit/model/manifest.hpp"
#include "probekit/pack/signing.hpp"

namespace probekit::pack {

class BuildError : public std::runtime_error {
 public:
  BuildError(std::string what, std::vector<model::Violation> violations = {})
      : std::runtime_error(std::move(what)), violations(std::move(violations)) {}
  std::vector<model::Violation> violations;
};

// Researcher-facing experiment configuration (input to build). Unlike the
// manifest it has no identity or fingerprint yet; capabilities may be
// declared for cross-checking but must equal the computed union.
struct BuildConfig {
  std::string name;
  std::string version = "1.0";
  std::string author_name;
  std::string description;
  std::vector<model::PluginConfig> plugin_configs;
  std::optional<std::set<model::Capability>> declared_capabilities;
  model::GlobalWakePolicy wake_policy;
  model::UploadPolicy upload_policy;

  static BuildConfig from_json(const model::json& j);
  static BuildConfig from_file(const std::filesystem::path& path);
};

// Exact union of required capabilities over the selected plugins.
// Throws BuildError on an unknown plugin.
std::set<model::Capability> compute_capabilities(
    const std::vector<model::PluginConfig>& configs,
    const std::vector<plugins::PluginDescriptor>& registry);

struct PackageContents {
  model::ExperimentManifest manifest;
  std::string manifest_bytes;
  std::string lock_bytes;
  std::optional<std::string> signature_bytes;  // absent for unsigned packages
};

struct VerifyResult {
  bool ok = false;
  std::string reason;  // "unsigned", "key mismatch", "bad signature", ...
  std::optional<model::ExperimentManifest> manifest;
};

// One row per descriptor: id, kind, capabilities, interval, options.
std::string render_plugin_table(const std::vector<plugins::PluginDescriptor>& registry);

// Validates against the registry (all violations reported at once),
// computes the least-privilege capability set, assembles the container
// (manifest.json, plugins.lock, signature.sig) and writes it atomically.
model::ExperimentManifest build_package(const BuildConfig& config,
                                        const std::vector<plugins::PluginDescriptor>& registry,
                                        const SigningKey& key,
                                        const std::filesystem::path& out_path,
                                        int64_t created_ts);

PackageContents load_package(const std::filesystem::path& path);
PackageContents load_package_bytes(const std::string& bytes);

// Signature message: canonical manifest bytes || sha256(plugins.lock).
std::string signature_message(const PackageContents& pkg);

// expected_key nullopt: verify against the public key embedded in
// signature.sig. Otherwise the embedded key must match it.
VerifyResult verify_package(const PackageContents& pkg,
                            const std::optional<SigningKey>& expected_key);
VerifyResult verify_package_file(const std::filesystem::path& path,
                                 const std::optional<SigningKey>& expected_key);

// Embedded signer public key, if any.
std::optional<SigningKey> package_signer(const PackageContents& pkg);

}  // namespace probekit::pack
