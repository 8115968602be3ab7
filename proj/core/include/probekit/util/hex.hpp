#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace probekit::util {

std::string to_hex(const uint8_t* data, size_t len);
std::string to_hex(const std::vector<uint8_t>& data);

// Throws std::invalid_argument on odd length or non-hex characters.
std::vector<uint8_t> from_hex(const std::string& hex);

}  // namespace probekit::util
