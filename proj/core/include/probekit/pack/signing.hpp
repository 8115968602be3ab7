#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <stdexcept>

namespace probekit::pack {

class SigningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Ed25519 key pair. Fingerprint is the lowercase hex SHA-256 of the public
// key bytes.
struct SigningKey {
  std::vector<uint8_t> public_key;
  std::vector<uint8_t> secret_key;  // empty for verify-only keys

  static SigningKey generate();

  std::string fingerprint() const;

  bool can_sign() const { return !secret_key.empty(); }

  // key.pub (hex, world-readable) and key.sec (hex, owner-only) in dir.
  void save(const std::filesystem::path& dir) const;
  static SigningKey load(const std::filesystem::path& dir);
  static SigningKey load_public(const std::filesystem::path& pub_file);

  std::vector<uint8_t> sign(const std::string& message) const;
  bool verify(const std::string& message, const std::vector<uint8_t>& signature) const;
};

std::string sha256_hex(const std::string& data);

}  // namespace probekit::pack
