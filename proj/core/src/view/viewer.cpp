#include "probekit/view/viewer.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "probekit/util/fs.hpp"
#include "probekit/util/zipfile.hpp"

namespace probekit::view {

using model::json;

void Selector::check() const {
  if (experiment_id.empty()) throw ViewError("experiment id required");
  if (scope == Scope::chunk && !chunk_id) throw ViewError("chunk scope requires a chunk id");
  if (scope == Scope::device && !device_id) throw ViewError("device scope requires a device id");
  if (roots.empty()) throw ViewError("at least one source root required");
}

namespace {

// All .zip files under the roots, in sorted path order so discovery order
// never influences the result.
std::vector<std::filesystem::path> discover(const Selector& sel) {
  std::vector<std::filesystem::path> files;
  for (const auto& root : sel.roots) {
    if (!std::filesystem::exists(root)) continue;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
      if (entry.is_regular_file() && entry.path().extension() == ".zip") {
        files.push_back(entry.path());
      }
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

bool selected(const Selector& sel, const model::ChunkManifest& m) {
  if (m.experiment_id != sel.experiment_id) return false;
  if (sel.device_id && m.device_id != *sel.device_id) return false;
  if (sel.scope == Scope::chunk && m.chunk_id != *sel.chunk_id) return false;
  return true;
}

}  // namespace

MergeResult merge(const Selector& selector) {
  selector.check();
  MergeResult result;
  std::set<std::string> seen_chunks;
  for (const auto& path : discover(selector)) {
    storage::ChunkContents chunk;
    try {
      chunk = storage::StorageManager::read_chunk_file(path);
    } catch (const std::exception& e) {
      // Not every zip under a root is a chunk; only CRC/format failures on
      // selected-looking files matter, and we cannot tell without parsing.
      if (selector.skip_corrupt) {
        result.corrupt_chunks.push_back(path.string());
        continue;
      }
      throw ViewError("corrupt chunk " + path.string() + ": " + e.what());
    }
    if (!selected(selector, chunk.manifest)) continue;
    if (!seen_chunks.insert(chunk.manifest.chunk_id).second) continue;
    result.chunks_read++;
    for (model::LogRecord& r : chunk.records) {
      MergedRecord m;
      m.device_id = chunk.manifest.device_id;
      if (r.payload_kind == model::PayloadKind::blob && r.blob_ref) {
        auto it = chunk.blobs.find(r.blob_ref->blob_name);
        if (it != chunk.blobs.end()) m.blob_bytes = it->second;
      }
      m.record = std::move(r);
      result.records.push_back(std::move(m));
    }
  }
  std::stable_sort(result.records.begin(), result.records.end(),
                   [](const MergedRecord& a, const MergedRecord& b) {
                     auto key = [](const MergedRecord& m) {
                       return std::tie(m.record.ts_ms, m.device_id, m.record.plugin_id,
                                       m.record.seq);
                     };
                     return key(a) < key(b);
                   });
  return result;
}

std::string preview(const Selector& selector, size_t limit) {
  MergeResult merged = merge(selector);
  std::ostringstream out;
  out << "ts_ms device plugin seq payload\n";
  size_t shown = 0;
  for (const MergedRecord& m : merged.records) {
    if (shown++ >= limit) break;
    out << m.record.ts_ms << " " << m.device_id << " " << m.record.plugin_id << " "
        << m.record.seq << " ";
    if (m.record.payload_kind == model::PayloadKind::blob && m.record.blob_ref) {
      out << "blob " << m.record.blob_ref->blob_name << " (" << m.record.blob_ref->byte_len
          << " bytes)";
    } else {
      out << m.record.payload.dump();
    }
    out << "\n";
  }
  return out.str();
}

void flatten_payload(const json& payload, const std::string& prefix,
                     std::vector<std::pair<std::string, json>>& out) {
  if (payload.is_object()) {
    for (const auto& [key, value] : payload.items()) {
      flatten_payload(value, prefix.empty() ? key : prefix + "." + key, out);
    }
  } else {
    out.emplace_back(prefix, payload);
  }
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string quoted = "\"";
  for (char c : field) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

std::vector<std::string> export_csv(const Selector& selector,
                                    const std::filesystem::path& out_dir) {
  MergeResult merged = merge(selector);
  std::filesystem::create_directories(out_dir);

  // Per plugin: column order (first seen) and rows keyed by column.
  struct Table {
    std::vector<std::string> columns;
    std::vector<std::map<std::string, std::string>> rows;
  };
  std::map<std::string, Table> tables;
  std::vector<std::string> plugin_order;

  for (const MergedRecord& m : merged.records) {
    if (m.record.payload_kind != model::PayloadKind::structured) continue;
    auto it = tables.find(m.record.plugin_id);
    if (it == tables.end()) {
      it = tables.emplace(m.record.plugin_id, Table{}).first;
      plugin_order.push_back(m.record.plugin_id);
    }
    Table& t = it->second;
    std::map<std::string, std::string> row;
    row["ts_ms"] = std::to_string(m.record.ts_ms);
    row["device_id"] = m.device_id;
    row["seq"] = std::to_string(m.record.seq);
    std::vector<std::pair<std::string, json>> flat;
    flatten_payload(m.record.payload, "", flat);
    for (const auto& [key, value] : flat) {
      if (std::find(t.columns.begin(), t.columns.end(), key) == t.columns.end()) {
        t.columns.push_back(key);
      }
      row[key] = value.is_string() ? value.get<std::string>() : value.dump();
    }
    t.rows.push_back(std::move(row));
  }

  std::vector<std::string> written;
  for (const std::string& plugin : plugin_order) {
    const Table& t = tables[plugin];
    std::vector<std::string> columns = {"ts_ms", "device_id", "seq"};
    columns.insert(columns.end(), t.columns.begin(), t.columns.end());
    std::ostringstream out;
    for (size_t i = 0; i < columns.size(); i++) {
      if (i) out << ",";
      out << csv_quote(columns[i]);
    }
    out << "\r\n";
    for (const auto& row : t.rows) {
      for (size_t i = 0; i < columns.size(); i++) {
        if (i) out << ",";
        auto it = row.find(columns[i]);
        if (it != row.end()) out << csv_quote(it->second);
      }
      out << "\r\n";
    }
    std::string name = plugin + ".csv";
    util::write_file(out_dir / name, out.str());
    written.push_back(name);
  }
  return written;
}

BlobResult extract_blobs(const Selector& selector, const std::filesystem::path& out_dir) {
  MergeResult merged = merge(selector);
  BlobResult result;
  std::map<std::string, std::ofstream> streams;  // <plugin>/<device>.stream
  for (const MergedRecord& m : merged.records) {
    if (m.record.payload_kind != model::PayloadKind::blob || !m.record.blob_ref) continue;
    const model::BlobRef& ref = *m.record.blob_ref;
    if (m.blob_bytes.size() != ref.byte_len ||
        util::crc32_of(m.blob_bytes) != ref.content_crc32) {
      result.failed.push_back(ref.blob_name);
      continue;
    }
    std::filesystem::path dir = out_dir / m.record.plugin_id / m.device_id;
    std::filesystem::create_directories(dir);
    std::string name = std::to_string(m.record.ts_ms) + "-" + std::to_string(m.record.seq) + ".bin";
    util::write_file(dir / name, m.blob_bytes);
    result.written.push_back((std::filesystem::path(m.record.plugin_id) / m.device_id / name)
                                 .string());
    std::string stream_key = m.record.plugin_id + "/" + m.device_id + ".stream";
    auto it = streams.find(stream_key);
    if (it == streams.end()) {
      it = streams.emplace(stream_key, std::ofstream(out_dir / stream_key, std::ios::binary))
               .first;
      result.written.push_back(stream_key);
    }
    it->second.write(m.blob_bytes.data(), static_cast<std::streamsize>(m.blob_bytes.size()));
  }
  return result;
}

}  // namespace probekit::view
