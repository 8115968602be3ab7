#include "probekit/util/zipfile.hpp"

#include <zlib.h>

#include <cstring>
#include <stdexcept>

#include "probekit/util/fs.hpp"

namespace probekit::util {

namespace {

constexpr uint32_t kLocalSig = 0x04034b50;
constexpr uint32_t kCentralSig = 0x02014b50;
constexpr uint32_t kEocdSig = 0x06054b50;
// Fixed DOS timestamp (2020-01-01 00:00:00) for reproducible archives.
constexpr uint16_t kDosTime = 0;
constexpr uint16_t kDosDate = (40 << 9) | (1 << 5) | 1;

void put16(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put32(std::string& out, uint32_t v) {
  put16(out, static_cast<uint16_t>(v & 0xffff));
  put16(out, static_cast<uint16_t>(v >> 16));
}

uint16_t get16(const std::string& d, size_t off) {
  return static_cast<uint16_t>(static_cast<uint8_t>(d[off]) |
                               (static_cast<uint8_t>(d[off + 1]) << 8));
}

uint32_t get32(const std::string& d, size_t off) {
  return static_cast<uint32_t>(get16(d, off)) | (static_cast<uint32_t>(get16(d, off + 2)) << 16);
}

}  // namespace

uint32_t crc32_of(const uint8_t* data, size_t len) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  return static_cast<uint32_t>(::crc32(crc, data, static_cast<uInt>(len)));
}

uint32_t crc32_of(const std::string& data) {
  return crc32_of(reinterpret_cast<const uint8_t*>(data.data()), data.size());
}

std::string deflate_raw(const std::string& data, int level) {
  z_stream zs{};
  if (deflateInit2(&zs, level, Z_DEFLATED, -15, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
    throw ZipError("deflateInit2 failed");
  }
  std::string out;
  out.resize(deflateBound(&zs, static_cast<uLong>(data.size())));
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  int rc = deflate(&zs, Z_FINISH);
  if (rc != Z_STREAM_END) {
    deflateEnd(&zs);
    throw ZipError("deflate failed");
  }
  out.resize(zs.total_out);
  deflateEnd(&zs);
  return out;
}

std::string inflate_raw(const std::string& data, uint64_t expected_size) {
  z_stream zs{};
  if (inflateInit2(&zs, -15) != Z_OK) throw ZipError("inflateInit2 failed");
  std::string out;
  out.resize(expected_size);
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  int rc = inflate(&zs, Z_FINISH);
  bool ok = (rc == Z_STREAM_END) && zs.total_out == expected_size;
  inflateEnd(&zs);
  if (!ok) throw ZipError("inflate failed or size mismatch");
  return out;
}

void ZipWriter::add_entry(const std::string& name, const std::string& data,
                          Compression compression) {
  add_entry(name, reinterpret_cast<const uint8_t*>(data.data()), data.size(), compression);
}

void ZipWriter::add_entry(const std::string& name, const uint8_t* data, size_t len,
                          Compression compression) {
  Entry e;
  e.name = name;
  e.crc = crc32_of(data, len);
  e.uncompressed_size = len;
  std::string raw(reinterpret_cast<const char*>(data), len);
  if (compression == Compression::deflate) {
    std::string comp = deflate_raw(raw);
    if (comp.size() < raw.size()) {
      e.compressed = std::move(comp);
      e.method = 8;
    } else {
      e.compressed = std::move(raw);
      e.method = 0;
    }
  } else {
    e.compressed = std::move(raw);
    e.method = 0;
  }
  entries_.push_back(std::move(e));
}

std::string ZipWriter::finish() const {
  std::string out;
  std::vector<uint64_t> offsets;
  offsets.reserve(entries_.size());
  for (const Entry& e : entries_) {
    offsets.push_back(out.size());
    put32(out, kLocalSig);
    put16(out, 20);  // version needed
    put16(out, 0);   // flags
    put16(out, e.method);
    put16(out, kDosTime);
    put16(out, kDosDate);
    put32(out, e.crc);
    put32(out, static_cast<uint32_t>(e.compressed.size()));
    put32(out, static_cast<uint32_t>(e.uncompressed_size));
    put16(out, static_cast<uint16_t>(e.name.size()));
    put16(out, 0);  // extra len
    out += e.name;
    out += e.compressed;
  }
  uint64_t cd_start = out.size();
  for (size_t i = 0; i < entries_.size(); ++i) {
    const Entry& e = entries_[i];
    put32(out, kCentralSig);
    put16(out, 20);  // version made by
    put16(out, 20);  // version needed
    put16(out, 0);
    put16(out, e.method);
    put16(out, kDosTime);
    put16(out, kDosDate);
    put32(out, e.crc);
    put32(out, static_cast<uint32_t>(e.compressed.size()));
    put32(out, static_cast<uint32_t>(e.uncompressed_size));
    put16(out, static_cast<uint16_t>(e.name.size()));
    put16(out, 0);  // extra
    put16(out, 0);  // comment
    put16(out, 0);  // disk
    put16(out, 0);  // internal attrs
    put32(out, 0);  // external attrs
    put32(out, static_cast<uint32_t>(offsets[i]));
    out += e.name;
  }
  uint64_t cd_size = out.size() - cd_start;
  put32(out, kEocdSig);
  put16(out, 0);
  put16(out, 0);
  put16(out, static_cast<uint16_t>(entries_.size()));
  put16(out, static_cast<uint16_t>(entries_.size()));
  put32(out, static_cast<uint32_t>(cd_size));
  put32(out, static_cast<uint32_t>(cd_start));
  put16(out, 0);  // comment len
  return out;
}

std::string ZipWriter::finish_with_archive_crc() const {
  std::string out = finish();
  // Rewrite the EOCD comment length (last two bytes) and append the
  // placeholder before computing the CRC, so the CRC covers the final EOCD.
  out[out.size() - 2] = 8;
  out[out.size() - 1] = 0;
  out += "00000000";
  uint32_t crc = crc32_of(reinterpret_cast<const uint8_t*>(out.data()), out.size() - 8);
  char hex[9];
  std::snprintf(hex, sizeof(hex), "%08x", crc);
  out.replace(out.size() - 8, 8, hex, 8);
  return out;
}

bool has_valid_archive_crc(const std::string& archive_bytes) {
  if (archive_bytes.size() <= 30) return false;
  std::string trailer = archive_bytes.substr(archive_bytes.size() - 8);
  uint32_t stated;
  try {
    size_t used = 0;
    stated = static_cast<uint32_t>(std::stoul(trailer, &used, 16));
    if (used != 8) return false;
  } catch (...) {
    return false;
  }
  uint32_t actual = crc32_of(reinterpret_cast<const uint8_t*>(archive_bytes.data()),
                             archive_bytes.size() - 8);
  return stated == actual;
}

void ZipWriter::write_atomic(const std::filesystem::path& path) const {
  atomic_write_file(path, finish());
}

ZipReader::ZipReader(std::string archive_bytes) : data_(std::move(archive_bytes)) {
  if (data_.size() < 22) throw ZipError("archive too small");
  // Find EOCD (scan back through possible comment).
  size_t eocd = std::string::npos;
  size_t scan_start = data_.size() >= 22 + 65535 ? data_.size() - 22 - 65535 : 0;
  for (size_t i = data_.size() - 22 + 1; i-- > scan_start;) {
    if (get32(data_, i) == kEocdSig) {
      eocd = i;
      break;
    }
  }
  if (eocd == std::string::npos) throw ZipError("end-of-central-directory not found");
  uint16_t count = get16(data_, eocd + 10);
  uint32_t cd_off = get32(data_, eocd + 16);
  size_t pos = cd_off;
  for (uint16_t i = 0; i < count; ++i) {
    if (pos + 46 > data_.size() || get32(data_, pos) != kCentralSig) {
      throw ZipError("bad central directory");
    }
    ZipEntryInfo info;
    info.method = get16(data_, pos + 10);
    info.crc32 = get32(data_, pos + 16);
    info.compressed_size = get32(data_, pos + 20);
    info.uncompressed_size = get32(data_, pos + 24);
    uint16_t name_len = get16(data_, pos + 28);
    uint16_t extra_len = get16(data_, pos + 30);
    uint16_t comment_len = get16(data_, pos + 32);
    uint32_t local_off = get32(data_, pos + 42);
    if (pos + 46 + name_len > data_.size()) throw ZipError("truncated central directory");
    info.name = data_.substr(pos + 46, name_len);
    entries_.push_back(info);
    local_offsets_.push_back(local_off);
    pos += 46u + name_len + extra_len + comment_len;
  }
}

ZipReader ZipReader::open(const std::filesystem::path& path) {
  return ZipReader(read_file(path));
}

bool ZipReader::has_entry(const std::string& name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return true;
  }
  return false;
}

std::string ZipReader::read(const std::string& name) const {
  for (size_t i = 0; i < entries_.size(); ++i) {
    const ZipEntryInfo& e = entries_[i];
    if (e.name != name) continue;
    uint64_t off = local_offsets_[i];
    if (off + 30 > data_.size() || get32(data_, off) != kLocalSig) {
      throw ZipError("bad local header for " + name);
    }
    uint16_t name_len = get16(data_, off + 26);
    uint16_t extra_len = get16(data_, off + 28);
    uint64_t data_off = off + 30 + name_len + extra_len;
    if (data_off + e.compressed_size > data_.size()) throw ZipError("truncated entry " + name);
    std::string comp = data_.substr(data_off, e.compressed_size);
    std::string raw;
    if (e.method == 8) {
      raw = inflate_raw(comp, e.uncompressed_size);
    } else if (e.method == 0) {
      raw = std::move(comp);
    } else {
      throw ZipError("unsupported compression method in " + name);
    }
    if (crc32_of(raw) != e.crc32) {
      throw ZipError("crc mismatch in entry " + name);
    }
    return raw;
  }
  throw ZipError("entry not found: " + name);
}

}  // namespace probekit::util
