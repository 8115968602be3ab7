#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace probekit::util {

// Creates dir (and parents) with owner-only permissions (0700).
void ensure_private_dir(const std::filesystem::path& dir);

std::string read_file(const std::filesystem::path& path);
std::vector<uint8_t> read_file_bytes(const std::filesystem::path& path);

void write_file(const std::filesystem::path& path, const std::string& data);

// Writes to a temp file in the same directory, fsyncs, then renames over the
// target so a crash never leaves a partially written file visible.
void atomic_write_file(const std::filesystem::path& path, const std::string& data);
void atomic_write_file(const std::filesystem::path& path, const uint8_t* data, size_t len);

// Appends and fsyncs.
void append_file(const std::filesystem::path& path, const std::string& data);

}  // namespace probekit::util
