#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "probekit/storage/storage_manager.hpp"

namespace probekit::view {

class ViewError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Scope { chunk, device, experiment };

// What to read: one chunk, one device, or the whole experiment, searched
// across one or more source roots (agent data dirs, dump dirs, server
// stores). The same chunk found under several roots is read once.
struct Selector {
  Scope scope = Scope::experiment;
  std::string experiment_id;
  std::optional<std::string> device_id;
  std::optional<std::string> chunk_id;
  std::vector<std::filesystem::path> roots;
  bool skip_corrupt = false;

  void check() const;  // throws ViewError on scope/field mismatch
};

struct MergedRecord {
  std::string device_id;
  model::LogRecord record;
  std::string blob_bytes;  // payload for blob records
};

struct MergeResult {
  std::vector<MergedRecord> records;
  std::vector<std::string> corrupt_chunks;  // reported when skip_corrupt
  size_t chunks_read = 0;
};

// Deterministic total order (ts_ms, device_id, plugin_id, seq) over all
// selected chunks, deduplicated by chunk_id.
MergeResult merge(const Selector& selector);

// First `limit` merged records, one line each.
std::string preview(const Selector& selector, size_t limit);

// One CSV per plugin id: columns ts_ms,device_id,seq then dot-flattened
// payload keys in first-seen order; RFC-4180 quoting. Returns the files
// written (relative to out_dir).
std::vector<std::string> export_csv(const Selector& selector,
                                    const std::filesystem::path& out_dir);

// Blobs written as <plugin>/<device>/<ts>-<seq>.bin plus the merge-order
// concatenation <plugin>/<device>.stream. CRC failures are reported without
// stopping the rest.
struct BlobResult {
  std::vector<std::string> written;  // relative to out_dir
  std::vector<std::string> failed;   // blob names with CRC mismatch
};
BlobResult extract_blobs(const Selector& selector, const std::filesystem::path& out_dir);

// Dot-join nested object keys; arrays and scalars serialize as-is.
void flatten_payload(const model::json& payload, const std::string& prefix,
                     std::vector<std::pair<std::string, model::json>>& out);
std::string csv_quote(const std::string& field);

}  // namespace probekit::view
