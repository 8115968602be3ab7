#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace probekit::model {

using nlohmann::json;

// Host-level data access rights; closed enumeration, unknown names are a
// validation error.
enum class Capability {
  SYS_CPU,
  SYS_MEM,
  NET_TRAFFIC,
  PROC_LIST,
  FS_EVENTS,
  CLOCK_EVENTS,
  ACTIVITY_STATE,
  SENSOR_SYNTH,
};

const std::vector<Capability>& all_capabilities();
std::string capability_name(Capability c);
std::optional<Capability> capability_from_name(const std::string& name);

enum class PluginKind { event, polling };
std::string plugin_kind_name(PluginKind k);
std::optional<PluginKind> plugin_kind_from_name(const std::string& name);

using OptionValue = std::variant<bool, int64_t, double, std::string>;
json option_value_to_json(const OptionValue& v);
std::optional<OptionValue> option_value_from_json(const json& j);

struct GlobalWakePolicy {
  bool allow_wakelocks = true;
  bool active_only = false;

  bool operator==(const GlobalWakePolicy&) const = default;
};

struct UploadPolicy {
  bool enabled = false;
  std::string server_url;
  bool unmetered_only = true;
  int64_t period_minutes = 15;
  bool delete_after_ack = true;

  bool operator==(const UploadPolicy&) const = default;
};

struct PluginConfig {
  std::string plugin_id;
  PluginKind kind = PluginKind::polling;
  std::optional<int64_t> interval_ms;  // present iff kind == polling
  std::map<std::string, OptionValue> options;

  bool operator==(const PluginConfig&) const = default;
};

struct ExperimentManifest {
  std::string experiment_id;  // UUID
  std::string name;
  std::string version;
  std::string author_name;
  std::string author_key_fingerprint;  // lowercase hex
  std::string description;
  int64_t created_ts = 0;  // ms since Unix epoch
  std::vector<PluginConfig> plugin_configs;
  std::set<Capability> capabilities;
  GlobalWakePolicy wake_policy;
  UploadPolicy upload_policy;
  int schema_version = 1;

  bool operator==(const ExperimentManifest&) const = default;
};

struct BlobRef {
  std::string blob_name;
  uint64_t byte_len = 0;
  uint32_t content_crc32 = 0;

  bool operator==(const BlobRef&) const = default;
};

enum class PayloadKind { structured, blob };

struct LogRecord {
  int64_t ts_ms = 0;
  std::string plugin_id;
  int64_t seq = 0;
  PayloadKind payload_kind = PayloadKind::structured;
  json payload;                  // when structured
  std::optional<BlobRef> blob_ref;  // when blob
};

// One JSON-lines record (sorted keys, no whitespace).
std::string record_to_line(const LogRecord& r);
LogRecord record_from_line(const std::string& line);

struct ChunkManifest {
  std::string chunk_id;       // UUID
  std::string experiment_id;  // UUID
  std::string device_id;      // UUID
  int64_t chunk_seq = 0;
  int64_t first_ts = 0;
  int64_t last_ts = 0;
  int64_t record_count = 0;
  int64_t blob_count = 0;
  uint32_t records_crc32 = 0;
  uint64_t uncompressed_bytes = 0;
  uint64_t compressed_bytes = 0;
  int schema_version = 1;
};

json chunk_manifest_to_json(const ChunkManifest& m);
ChunkManifest chunk_manifest_from_json(const json& j);

struct DeviceIdentity {
  std::string device_id;  // UUID, generated once and persisted
  std::string platform_label;
};

// Dotted numeric version comparison; non-numeric components compare as text.
// Returns <0, 0, >0.
int compare_versions(const std::string& a, const std::string& b);

}  // namespace probekit::model
