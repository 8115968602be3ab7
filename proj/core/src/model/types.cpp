#include "probekit/model/types.hpp"

#include <charconv>

namespace probekit::model {

const std::vector<Capability>& all_capabilities() {
  static const std::vector<Capability> caps = {
      Capability::SYS_CPU,      Capability::SYS_MEM,       Capability::NET_TRAFFIC,
      Capability::PROC_LIST,    Capability::FS_EVENTS,     Capability::CLOCK_EVENTS,
      Capability::ACTIVITY_STATE, Capability::SENSOR_SYNTH,
  };
  return caps;
}

std::string capability_name(Capability c) {
  switch (c) {
    case Capability::SYS_CPU: return "SYS_CPU";
    case Capability::SYS_MEM: return "SYS_MEM";
    case Capability::NET_TRAFFIC: return "NET_TRAFFIC";
    case Capability::PROC_LIST: return "PROC_LIST";
    case Capability::FS_EVENTS: return "FS_EVENTS";
    case Capability::CLOCK_EVENTS: return "CLOCK_EVENTS";
    case Capability::ACTIVITY_STATE: return "ACTIVITY_STATE";
    case Capability::SENSOR_SYNTH: return "SENSOR_SYNTH";
  }
  return "?";
}

std::optional<Capability> capability_from_name(const std::string& name) {
  for (Capability c : all_capabilities()) {
    if (capability_name(c) == name) return c;
  }
  return std::nullopt;
}

std::string plugin_kind_name(PluginKind k) {
  return k == PluginKind::event ? "event" : "polling";
}

std::optional<PluginKind> plugin_kind_from_name(const std::string& name) {
  if (name == "event") return PluginKind::event;
  if (name == "polling") return PluginKind::polling;
  return std::nullopt;
}

json option_value_to_json(const OptionValue& v) {
  return std::visit([](const auto& x) { return json(x); }, v);
}

std::optional<OptionValue> option_value_from_json(const json& j) {
  if (j.is_boolean()) return OptionValue(j.get<bool>());
  if (j.is_number_integer()) return OptionValue(j.get<int64_t>());
  if (j.is_number_float()) return OptionValue(j.get<double>());
  if (j.is_string()) return OptionValue(j.get<std::string>());
  return std::nullopt;
}

std::string record_to_line(const LogRecord& r) {
  json j;
  j["ts_ms"] = r.ts_ms;
  j["plugin_id"] = r.plugin_id;
  j["seq"] = r.seq;
  if (r.payload_kind == PayloadKind::structured) {
    j["kind"] = "structured";
    j["payload"] = r.payload;
  } else {
    j["kind"] = "blob";
    j["blob"] = {{"name", r.blob_ref->blob_name},
                 {"len", r.blob_ref->byte_len},
                 {"crc32", r.blob_ref->content_crc32}};
  }
  return j.dump();
}

LogRecord record_from_line(const std::string& line) {
  json j = json::parse(line);
  LogRecord r;
  r.ts_ms = j.at("ts_ms").get<int64_t>();
  r.plugin_id = j.at("plugin_id").get<std::string>();
  r.seq = j.at("seq").get<int64_t>();
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "structured") {
    r.payload_kind = PayloadKind::structured;
    r.payload = j.at("payload");
  } else if (kind == "blob") {
    r.payload_kind = PayloadKind::blob;
    BlobRef b;
    const json& bj = j.at("blob");
    b.blob_name = bj.at("name").get<std::string>();
    b.byte_len = bj.at("len").get<uint64_t>();
    b.content_crc32 = bj.at("crc32").get<uint32_t>();
    r.blob_ref = b;
  } else {
    throw std::runtime_error("unknown record kind: " + kind);
  }
  return r;
}

json chunk_manifest_to_json(const ChunkManifest& m) {
  return json{{"chunk_id", m.chunk_id},
              {"experiment_id", m.experiment_id},
              {"device_id", m.device_id},
              {"chunk_seq", m.chunk_seq},
              {"first_ts", m.first_ts},
              {"last_ts", m.last_ts},
              {"record_count", m.record_count},
              {"blob_count", m.blob_count},
              {"records_crc32", m.records_crc32},
              {"uncompressed_bytes", m.uncompressed_bytes},
              {"compressed_bytes", m.compressed_bytes},
              {"schema_version", m.schema_version}};
}

ChunkManifest chunk_manifest_from_json(const json& j) {
  ChunkManifest m;
  m.chunk_id = j.at("chunk_id").get<std::string>();
  m.experiment_id = j.at("experiment_id").get<std::string>();
  m.device_id = j.at("device_id").get<std::string>();
  m.chunk_seq = j.at("chunk_seq").get<int64_t>();
  m.first_ts = j.at("first_ts").get<int64_t>();
  m.last_ts = j.at("last_ts").get<int64_t>();
  m.record_count = j.at("record_count").get<int64_t>();
  m.blob_count = j.at("blob_count").get<int64_t>();
  m.records_crc32 = j.at("records_crc32").get<uint32_t>();
  m.uncompressed_bytes = j.at("uncompressed_bytes").get<uint64_t>();
  m.compressed_bytes = j.at("compressed_bytes").get<uint64_t>();
  m.schema_version = j.at("schema_version").get<int>();
  return m;
}

int compare_versions(const std::string& a, const std::string& b) {
  size_t ia = 0, ib = 0;
  while (ia < a.size() || ib < b.size()) {
    size_t ja = a.find('.', ia);
    size_t jb = b.find('.', ib);
    std::string ca = a.substr(ia, (ja == std::string::npos ? a.size() : ja) - ia);
    std::string cb = b.substr(ib, (jb == std::string::npos ? b.size() : jb) - ib);
    int64_t na = 0, nb = 0;
    auto ra = std::from_chars(ca.data(), ca.data() + ca.size(), na);
    auto rb = std::from_chars(cb.data(), cb.data() + cb.size(), nb);
    bool numeric_a = ra.ec == std::errc() && ra.ptr == ca.data() + ca.size();
    bool numeric_b = rb.ec == std::errc() && rb.ptr == cb.data() + cb.size();
    if (numeric_a && numeric_b) {
      if (na != nb) return na < nb ? -1 : 1;
    } else {
      if (ca != cb) return ca < cb ? -1 : 1;
    }
    ia = ja == std::string::npos ? a.size() : ja + 1;
    ib = jb == std::string::npos ? b.size() : jb + 1;
  }
  return 0;
}

}  // namespace probekit::model
