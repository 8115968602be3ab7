#pragma once

#include <string>
#include <vector>

#include "probekit/model/types.hpp"
#include "probekit/plugin/descriptor.hpp"

namespace probekit::model {

class ManifestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr int kManifestSchemaVersion = 1;
constexpr int64_t kMinPollingIntervalMs = 10;

// Structural validity only; registry-dependent checks live in
// validate_manifest.
json manifest_to_json(const ExperimentManifest& m);
ExperimentManifest manifest_from_json(const json& j);

// Throws ManifestError on malformed syntax, unknown capability, unsupported
// schema_version, or a broken type-level invariant.
ExperimentManifest parse_manifest(const std::string& bytes);

// Deterministic bytes: sorted keys, no insignificant whitespace, numbers in
// shortest form. Signature input.
std::string canonicalize_manifest(const ExperimentManifest& m);

struct Violation {
  std::string code;
  std::string message;
};

// Empty list iff the manifest is consistent with the registry: known
// plugins, valid options, capabilities equal to the exact required union,
// and wake policy compatible with the polling intervals.
std::vector<Violation> validate_manifest(const ExperimentManifest& m,
                                         const std::vector<plugins::PluginDescriptor>& registry);

}  // namespace probekit::model
