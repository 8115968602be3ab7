#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "probekit/model/types.hpp"
#include "probekit/sched/clock.hpp"

namespace probekit::storage {

struct StorageConfig {
  std::filesystem::path data_dir;
  uint64_t chunk_max_uncompressed_bytes = 4ull * 1024 * 1024;
  int64_t chunk_max_age_ms = 900'000;
  uint64_t cache_flush_bytes = 64 * 1024;
  int64_t cache_flush_interval_ms = 5000;
};

class StorageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ChunkCorruptionError : public StorageError {
 public:
  ChunkCorruptionError(const std::string& chunk_id, const std::string& what)
      : StorageError("chunk " + chunk_id + " corrupt: " + what), chunk_id(chunk_id) {}
  std::string chunk_id;
};

struct ChunkContents {
  model::ChunkManifest manifest;
  std::vector<model::LogRecord> records;
  std::map<std::string, std::string> blobs;  // blob_name -> bytes
};

// The Storage Manager: timestamps and formats records, buffers them in an
// internal cache, and seals them into compressed CRC-protected chunk
// containers under <data_dir>/<experiment_id>/<device_id>/. All directories
// are created owner-only.
class StorageManager {
 public:
  StorageManager(StorageConfig config, std::string experiment_id, std::string device_id);

  // Buffers one structured record; ts from the clock, seq monotone within
  // the open chunk. Auto-flushes past cache_flush_bytes and rotates past the
  // chunk thresholds.
  std::pair<int64_t, int64_t> append(const std::string& plugin_id, const model::json& payload,
                                     const sched::Clock& clock);

  // Blob bytes are staged immediately; the record references them by name.
  std::pair<int64_t, int64_t> append_blob(const std::string& plugin_id, const std::string& name,
                                          const std::string& bytes, const sched::Clock& clock);

  // Drains the cache to the open chunk's staging file. Returns bytes written.
  uint64_t flush();

  // Flushes, then writes the container atomically and starts a new open
  // chunk. No-op (nullopt) when the open chunk has no records.
  std::optional<model::ChunkManifest> seal_chunk();

  // Sealed chunks ordered by chunk_seq.
  std::vector<model::ChunkManifest> list_chunks() const;

  // Verifies container and record-stream CRCs before returning.
  ChunkContents read_chunk(const std::string& chunk_id) const;

  // Idempotent.
  void delete_chunk(const std::string& chunk_id);

  // Copies (never moves) all sealed chunk files into dest_dir. Returns the
  // destination file names.
  std::vector<std::string> dump(const std::filesystem::path& dest_dir) const;

  std::filesystem::path chunk_path(const model::ChunkManifest& m) const;
  std::filesystem::path chunk_dir() const { return dir_; }

  int64_t open_record_count() const;
  int64_t next_chunk_seq() const { return chunk_seq_; }

  static ChunkContents read_chunk_file(const std::filesystem::path& path);

 private:
  void load_or_init_open_state();
  void recover_previous_staging();
  std::optional<model::ChunkManifest> seal_locked();
  uint64_t flush_locked();
  void persist_open_state();
  std::filesystem::path find_chunk_file(const std::string& chunk_id) const;

  StorageConfig config_;
  std::string experiment_id_;
  std::string device_id_;
  std::filesystem::path dir_;      // sealed chunks
  std::filesystem::path staging_;  // open chunk staging

  mutable std::mutex mu_;
  std::string open_chunk_id_;
  int64_t chunk_seq_ = 0;
  int64_t next_seq_ = 0;
  int64_t first_ts_ = 0;
  int64_t last_ts_ = 0;
  int64_t record_count_ = 0;
  int64_t blob_count_ = 0;
  int64_t chunk_opened_ts_ = 0;
  uint64_t staged_bytes_ = 0;  // bytes already in staging records file
  std::vector<std::string> cache_;
  uint64_t cache_bytes_ = 0;
  std::vector<std::string> blob_names_;
};

}  // namespace probekit::storage
