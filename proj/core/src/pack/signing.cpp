#include "probekit/pack/signing.hpp"

#include <sodium.h>
#include <sys/stat.h>

#include "probekit/util/fs.hpp"
#include "probekit/util/hex.hpp"

namespace probekit::pack {

namespace {

void init_sodium() {
  static const bool ok = sodium_init() >= 0;
  if (!ok) throw SigningError("libsodium initialization failed");
}

}  // namespace

std::string sha256_hex(const std::string& data) {
  init_sodium();
  uint8_t digest[crypto_hash_sha256_BYTES];
  crypto_hash_sha256(digest, reinterpret_cast<const uint8_t*>(data.data()), data.size());
  return util::to_hex(digest, sizeof(digest));
}

SigningKey SigningKey::generate() {
  init_sodium();
  SigningKey key;
  key.public_key.resize(crypto_sign_PUBLICKEYBYTES);
  key.secret_key.resize(crypto_sign_SECRETKEYBYTES);
  crypto_sign_keypair(key.public_key.data(), key.secret_key.data());
  return key;
}

std::string SigningKey::fingerprint() const {
  return sha256_hex(std::string(public_key.begin(), public_key.end()));
}

void SigningKey::save(const std::filesystem::path& dir) const {
  util::ensure_private_dir(dir);
  util::write_file(dir / "key.pub", util::to_hex(public_key) + "\n");
  if (can_sign()) {
    util::atomic_write_file(dir / "key.sec", util::to_hex(secret_key) + "\n");
    ::chmod((dir / "key.sec").c_str(), 0600);
  }
}

static std::vector<uint8_t> read_hex_file(const std::filesystem::path& path) {
  std::string hex = util::read_file(path);
  while (!hex.empty() && (hex.back() == '\n' || hex.back() == '\r')) hex.pop_back();
  return util::from_hex(hex);
}

SigningKey SigningKey::load(const std::filesystem::path& dir) {
  SigningKey key;
  key.public_key = read_hex_file(dir / "key.pub");
  if (std::filesystem::exists(dir / "key.sec")) {
    key.secret_key = read_hex_file(dir / "key.sec");
  }
  if (key.public_key.size() != crypto_sign_PUBLICKEYBYTES) {
    throw SigningError("bad public key length in " + dir.string());
  }
  return key;
}

SigningKey SigningKey::load_public(const std::filesystem::path& pub_file) {
  SigningKey key;
  key.public_key = read_hex_file(pub_file);
  if (key.public_key.size() != crypto_sign_PUBLICKEYBYTES) {
    throw SigningError("bad public key length in " + pub_file.string());
  }
  return key;
}

std::vector<uint8_t> SigningKey::sign(const std::string& message) const {
  init_sodium();
  if (!can_sign()) throw SigningError("no secret key available");
  std::vector<uint8_t> sig(crypto_sign_BYTES);
  crypto_sign_detached(sig.data(), nullptr, reinterpret_cast<const uint8_t*>(message.data()),
                       message.size(), secret_key.data());
  return sig;
}

bool SigningKey::verify(const std::string& message, const std::vector<uint8_t>& signature) const {
  init_sodium();
  if (signature.size() != crypto_sign_BYTES) return false;
  return crypto_sign_verify_detached(signature.data(),
                                     reinterpret_cast<const uint8_t*>(message.data()),
                                     message.size(), public_key.data()) == 0;
}

}  // namespace probekit::pack
