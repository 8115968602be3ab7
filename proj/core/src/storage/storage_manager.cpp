#include "probekit/storage/storage_manager.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>

#include "probekit/util/fs.hpp"
#include "probekit/util/uuid.hpp"
#include "probekit/util/zipfile.hpp"

namespace probekit::storage {

namespace fs = std::filesystem;
using model::ChunkManifest;
using model::LogRecord;

namespace {

std::string chunk_file_name(int64_t chunk_seq, const std::string& chunk_id) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%08" PRId64, chunk_seq);
  return std::string(buf) + "-" + chunk_id + ".zip";
}

bool parse_chunk_file_name(const std::string& name, int64_t& seq, std::string& chunk_id) {
  if (name.size() < 8 + 1 + 36 + 4 || name.substr(name.size() - 4) != ".zip") return false;
  if (name[8] != '-') return false;
  try {
    seq = std::stoll(name.substr(0, 8));
  } catch (...) {
    return false;
  }
  chunk_id = name.substr(9, name.size() - 9 - 4);
  return util::is_uuid(chunk_id);
}

}  // namespace

StorageManager::StorageManager(StorageConfig config, std::string experiment_id,
                               std::string device_id)
    : config_(std::move(config)),
      experiment_id_(std::move(experiment_id)),
      device_id_(std::move(device_id)) {
  if (config_.chunk_max_uncompressed_bytes == 0 || config_.chunk_max_age_ms <= 0 ||
      config_.cache_flush_bytes == 0 || config_.cache_flush_interval_ms <= 0) {
    throw StorageError("storage thresholds must be positive");
  }
  if (config_.cache_flush_bytes >= config_.chunk_max_uncompressed_bytes) {
    throw StorageError("cache_flush_bytes must be smaller than chunk_max_uncompressed_bytes");
  }
  dir_ = config_.data_dir / experiment_id_ / device_id_;
  staging_ = dir_ / "open";
  util::ensure_private_dir(staging_ / "blobs");
  load_or_init_open_state();
}

void StorageManager::load_or_init_open_state() {
  for (const auto& entry : fs::directory_iterator(dir_)) {
    int64_t seq;
    std::string id;
    if (entry.is_regular_file() && parse_chunk_file_name(entry.path().filename(), seq, id)) {
      chunk_seq_ = std::max(chunk_seq_, seq + 1);
    }
  }
  recover_previous_staging();
  open_chunk_id_ = util::uuid4();
  next_seq_ = 0;
  first_ts_ = last_ts_ = 0;
  record_count_ = blob_count_ = 0;
  chunk_opened_ts_ = 0;
  staged_bytes_ = 0;
  blob_names_.clear();
  persist_open_state();
}

// Records left in staging by a previous run are sealed as the next chunk so
// the sequence continues without gaps or data loss.
void StorageManager::recover_previous_staging() {
  fs::path records = staging_ / "records.jsonl";
  if (!fs::exists(records) || fs::file_size(records) == 0) return;
  fs::path open_state = staging_ / "open.json";
  std::string chunk_id = util::uuid4();
  if (fs::exists(open_state)) {
    try {
      chunk_id = model::json::parse(util::read_file(open_state)).at("chunk_id");
    } catch (...) {
    }
  }
  std::string stream = util::read_file(records);
  ChunkManifest m;
  m.chunk_id = chunk_id;
  m.experiment_id = experiment_id_;
  m.device_id = device_id_;
  m.chunk_seq = chunk_seq_;
  size_t pos = 0;
  while (pos < stream.size()) {
    size_t nl = stream.find('\n', pos);
    if (nl == std::string::npos) break;
    LogRecord r = model::record_from_line(stream.substr(pos, nl - pos));
    if (m.record_count == 0) m.first_ts = r.ts_ms;
    m.last_ts = r.ts_ms;
    ++m.record_count;
    if (r.payload_kind == model::PayloadKind::blob) ++m.blob_count;
    pos = nl + 1;
  }
  if (m.record_count == 0) return;
  m.records_crc32 = util::crc32_of(stream);
  m.uncompressed_bytes = stream.size();

  util::ZipWriter zip;
  zip.add_entry("records.jsonl", stream);
  if (fs::exists(staging_ / "blobs")) {
    for (const auto& b : fs::directory_iterator(staging_ / "blobs")) {
      zip.add_entry("blobs/" + b.path().filename().string(), util::read_file(b.path()));
    }
  }
  // compressed_bytes covers the records entry; fill after compressing.
  std::string probe = util::deflate_raw(stream);
  m.compressed_bytes = std::min(probe.size(), stream.size());
  zip.add_entry("manifest.json", model::chunk_manifest_to_json(m).dump());
  util::atomic_write_file(dir_ / chunk_file_name(m.chunk_seq, m.chunk_id),
                          zip.finish_with_archive_crc());
  ++chunk_seq_;

  fs::remove(records);
  for (const auto& b : fs::directory_iterator(staging_ / "blobs")) fs::remove(b.path());
}

void StorageManager::persist_open_state() {
  util::atomic_write_file(staging_ / "open.json",
                          model::json{{"chunk_id", open_chunk_id_}}.dump());
}

std::pair<int64_t, int64_t> StorageManager::append(const std::string& plugin_id,
                                                   const model::json& payload,
                                                   const sched::Clock& clock) {
  std::lock_guard lock(mu_);
  LogRecord r;
  r.ts_ms = clock.now_ms();
  r.plugin_id = plugin_id;
  r.seq = next_seq_++;
  r.payload_kind = model::PayloadKind::structured;
  r.payload = payload;
  std::string line = model::record_to_line(r) + "\n";
  if (record_count_ == 0) {
    first_ts_ = r.ts_ms;
    chunk_opened_ts_ = r.ts_ms;
  }
  last_ts_ = r.ts_ms;
  ++record_count_;
  cache_bytes_ += line.size();
  cache_.push_back(std::move(line));

  if (cache_bytes_ >= config_.cache_flush_bytes) flush_locked();
  if (staged_bytes_ + cache_bytes_ >= config_.chunk_max_uncompressed_bytes ||
      r.ts_ms - chunk_opened_ts_ >= config_.chunk_max_age_ms) {
    seal_locked();
  }
  return {r.ts_ms, r.seq};
}

std::pair<int64_t, int64_t> StorageManager::append_blob(const std::string& plugin_id,
                                                        const std::string& name,
                                                        const std::string& bytes,
                                                        const sched::Clock& clock) {
  std::lock_guard lock(mu_);
  std::string blob_name = name;
  for (const std::string& existing : blob_names_) {
    if (existing == blob_name) {
      blob_name = std::to_string(next_seq_) + "-" + name;  // keep names unique per chunk
      break;
    }
  }
  try {
    util::atomic_write_file(staging_ / "blobs" / blob_name,
                            reinterpret_cast<const uint8_t*>(bytes.data()), bytes.size());
  } catch (const std::exception& e) {
    throw StorageError(std::string("blob write failed: ") + e.what());
  }
  blob_names_.push_back(blob_name);

  LogRecord r;
  r.ts_ms = clock.now_ms();
  r.plugin_id = plugin_id;
  r.seq = next_seq_++;
  r.payload_kind = model::PayloadKind::blob;
  r.blob_ref = model::BlobRef{blob_name, bytes.size(), util::crc32_of(bytes)};
  std::string line = model::record_to_line(r) + "\n";
  if (record_count_ == 0) {
    first_ts_ = r.ts_ms;
    chunk_opened_ts_ = r.ts_ms;
  }
  last_ts_ = r.ts_ms;
  ++record_count_;
  ++blob_count_;
  cache_bytes_ += line.size();
  cache_.push_back(std::move(line));
  if (cache_bytes_ >= config_.cache_flush_bytes) flush_locked();
  return {r.ts_ms, r.seq};
}

uint64_t StorageManager::flush() {
  std::lock_guard lock(mu_);
  return flush_locked();
}

uint64_t StorageManager::flush_locked() {
  if (cache_.empty()) return 0;
  std::string batch;
  for (const std::string& line : cache_) batch += line;
  try {
    util::append_file(staging_ / "records.jsonl", batch);
  } catch (const std::exception& e) {
    // Cache retained for retry.
    throw StorageError(std::string("flush failed: ") + e.what());
  }
  staged_bytes_ += batch.size();
  cache_.clear();
  cache_bytes_ = 0;
  return batch.size();
}

std::optional<ChunkManifest> StorageManager::seal_chunk() {
  std::lock_guard lock(mu_);
  return seal_locked();
}

std::optional<ChunkManifest> StorageManager::seal_locked() {
  flush_locked();
  if (record_count_ == 0) return std::nullopt;

  std::string stream = util::read_file(staging_ / "records.jsonl");
  ChunkManifest m;
  m.chunk_id = open_chunk_id_;
  m.experiment_id = experiment_id_;
  m.device_id = device_id_;
  m.chunk_seq = chunk_seq_;
  m.first_ts = first_ts_;
  m.last_ts = last_ts_;
  m.record_count = record_count_;
  m.blob_count = blob_count_;
  m.records_crc32 = util::crc32_of(stream);
  m.uncompressed_bytes = stream.size();
  std::string compressed = util::deflate_raw(stream);
  m.compressed_bytes = std::min(compressed.size(), stream.size());

  util::ZipWriter zip;
  zip.add_entry("manifest.json", model::chunk_manifest_to_json(m).dump());
  zip.add_entry("records.jsonl", stream);
  for (const std::string& blob_name : blob_names_) {
    zip.add_entry("blobs/" + blob_name, util::read_file(staging_ / "blobs" / blob_name));
  }
  try {
    // Whole-archive CRC trailer: corruption anywhere in the container is
    // detectable, not just in entry payloads.
    util::atomic_write_file(chunk_path(m), zip.finish_with_archive_crc());
  } catch (const std::exception& e) {
    throw StorageError(std::string("seal failed: ") + e.what());
  }

  fs::remove(staging_ / "records.jsonl");
  for (const std::string& blob_name : blob_names_) fs::remove(staging_ / "blobs" / blob_name);
  ++chunk_seq_;
  open_chunk_id_ = util::uuid4();
  next_seq_ = 0;
  first_ts_ = last_ts_ = 0;
  record_count_ = blob_count_ = 0;
  chunk_opened_ts_ = 0;
  staged_bytes_ = 0;
  blob_names_.clear();
  persist_open_state();
  return m;
}

std::filesystem::path StorageManager::chunk_path(const ChunkManifest& m) const {
  return dir_ / chunk_file_name(m.chunk_seq, m.chunk_id);
}

std::vector<ChunkManifest> StorageManager::list_chunks() const {
  std::lock_guard lock(mu_);
  std::vector<ChunkManifest> out;
  for (const auto& entry : fs::directory_iterator(dir_)) {
    int64_t seq;
    std::string id;
    if (!entry.is_regular_file() ||
        !parse_chunk_file_name(entry.path().filename(), seq, id)) {
      continue;
    }
    util::ZipReader zip = util::ZipReader::open(entry.path());
    out.push_back(model::chunk_manifest_from_json(model::json::parse(zip.read("manifest.json"))));
  }
  std::sort(out.begin(), out.end(),
            [](const ChunkManifest& a, const ChunkManifest& b) { return a.chunk_seq < b.chunk_seq; });
  return out;
}

std::filesystem::path StorageManager::find_chunk_file(const std::string& chunk_id) const {
  for (const auto& entry : fs::directory_iterator(dir_)) {
    int64_t seq;
    std::string id;
    if (entry.is_regular_file() && parse_chunk_file_name(entry.path().filename(), seq, id) &&
        id == chunk_id) {
      return entry.path();
    }
  }
  return {};
}

ChunkContents StorageManager::read_chunk_file(const fs::path& path) {
  std::string chunk_label = path.filename().string();
  try {
    std::string bytes = util::read_file(path);
    if (!util::has_valid_archive_crc(bytes)) {
      throw ChunkCorruptionError(chunk_label, "archive crc trailer mismatch");
    }
    util::ZipReader zip{std::move(bytes)};
    ChunkContents out;
    out.manifest =
        model::chunk_manifest_from_json(model::json::parse(zip.read("manifest.json")));
    std::string stream = zip.read("records.jsonl");
    if (util::crc32_of(stream) != out.manifest.records_crc32) {
      throw ChunkCorruptionError(out.manifest.chunk_id, "records crc mismatch");
    }
    size_t pos = 0;
    while (pos < stream.size()) {
      size_t nl = stream.find('\n', pos);
      if (nl == std::string::npos) break;
      out.records.push_back(model::record_from_line(stream.substr(pos, nl - pos)));
      pos = nl + 1;
    }
    if (static_cast<int64_t>(out.records.size()) != out.manifest.record_count) {
      throw ChunkCorruptionError(out.manifest.chunk_id, "record count mismatch");
    }
    for (const auto& entry : zip.entries()) {
      if (entry.name.rfind("blobs/", 0) == 0) {
        out.blobs[entry.name.substr(6)] = zip.read(entry.name);
      }
    }
    for (const model::LogRecord& r : out.records) {
      if (r.payload_kind != model::PayloadKind::blob) continue;
      auto it = out.blobs.find(r.blob_ref->blob_name);
      if (it == out.blobs.end() || it->second.size() != r.blob_ref->byte_len ||
          util::crc32_of(it->second) != r.blob_ref->content_crc32) {
        throw ChunkCorruptionError(out.manifest.chunk_id,
                                   "blob " + r.blob_ref->blob_name + " crc/length mismatch");
      }
    }
    return out;
  } catch (const ChunkCorruptionError&) {
    throw;
  } catch (const std::exception& e) {
    throw ChunkCorruptionError(chunk_label, e.what());
  }
}

ChunkContents StorageManager::read_chunk(const std::string& chunk_id) const {
  fs::path path;
  {
    std::lock_guard lock(mu_);
    path = find_chunk_file(chunk_id);
  }
  if (path.empty()) throw StorageError("no such chunk: " + chunk_id);
  return read_chunk_file(path);
}

void StorageManager::delete_chunk(const std::string& chunk_id) {
  std::lock_guard lock(mu_);
  fs::path path = find_chunk_file(chunk_id);
  if (!path.empty()) fs::remove(path);
}

std::vector<std::string> StorageManager::dump(const fs::path& dest_dir) const {
  std::lock_guard lock(mu_);
  fs::create_directories(dest_dir);
  std::vector<std::string> copied;
  for (const auto& entry : fs::directory_iterator(dir_)) {
    int64_t seq;
    std::string id;
    if (!entry.is_regular_file() ||
        !parse_chunk_file_name(entry.path().filename(), seq, id)) {
      continue;
    }
    fs::path dest = dest_dir / entry.path().filename();
    fs::copy_file(entry.path(), dest, fs::copy_options::overwrite_existing);
    copied.push_back(dest.filename().string());
  }
  std::sort(copied.begin(), copied.end());
  return copied;
}

int64_t StorageManager::open_record_count() const {
  std::lock_guard lock(mu_);
  return record_count_;
}

}  // namespace probekit::storage
