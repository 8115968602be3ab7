#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace probekit::util {

// Minimal ZIP container support: stored and DEFLATE entries, CRC-32 per
// entry, fixed timestamps so identical inputs produce identical archives.
// No zip64, no encryption; entries are held in memory (chunks are bounded
// by the rotation threshold).

struct ZipEntryInfo {
  std::string name;
  uint32_t crc32 = 0;
  uint64_t compressed_size = 0;
  uint64_t uncompressed_size = 0;
  uint16_t method = 0;  // 0 = stored, 8 = deflate
};

class ZipWriter {
 public:
  enum class Compression { stored, deflate };

  void add_entry(const std::string& name, const std::string& data,
                 Compression compression = Compression::deflate);
  void add_entry(const std::string& name, const uint8_t* data, size_t len,
                 Compression compression = Compression::deflate);

  // Serialized archive bytes (local headers + central directory + EOCD).
  std::string finish() const;

  // Like finish(), but the EOCD comment carries the CRC-32 (8 hex chars) of
  // everything before it, extending corruption detection to headers and
  // metadata. Still a valid archive for standard readers.
  std::string finish_with_archive_crc() const;

  // finish() written via temp file + rename.
  void write_atomic(const std::filesystem::path& path) const;

 private:
  struct Entry {
    std::string name;
    std::string compressed;
    uint32_t crc = 0;
    uint64_t uncompressed_size = 0;
    uint16_t method = 0;
  };
  std::vector<Entry> entries_;
};

class ZipError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ZipReader {
 public:
  explicit ZipReader(std::string archive_bytes);
  static ZipReader open(const std::filesystem::path& path);

  const std::vector<ZipEntryInfo>& entries() const { return entries_; }
  bool has_entry(const std::string& name) const;

  // Decompresses and verifies the entry CRC; throws ZipError on mismatch.
  std::string read(const std::string& name) const;

 private:
  std::string data_;
  std::vector<ZipEntryInfo> entries_;
  std::vector<uint64_t> local_offsets_;
};

uint32_t crc32_of(const uint8_t* data, size_t len);
uint32_t crc32_of(const std::string& data);

// True iff the archive ends in a finish_with_archive_crc trailer that
// matches the preceding bytes.
bool has_valid_archive_crc(const std::string& archive_bytes);

std::string deflate_raw(const std::string& data, int level = 9);
std::string inflate_raw(const std::string& data, uint64_t expected_size);

}  // namespace probekit::util
