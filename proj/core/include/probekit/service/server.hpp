#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>

#include "probekit/model/manifest.hpp"

namespace httplib {
class Server;
}

namespace probekit::service {

struct ServerConfig {
  std::filesystem::path root;
  std::string listen_host = "127.0.0.1";
  int listen_port = 8750;
  std::string token;  // bearer token for publish and upload
};

class ServiceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filesystem-backed collection server: experiment packages under
// experiments/<id>/<version>.pkg, ingested chunks under
// data/<experiment>/<device>/<chunk_id>.zip. Uploads are written durably
// (temp + fsync + rename) before the 200 response, and deduplicated by
// chunk_id so retries are harmless.
class CollectionServer {
 public:
  explicit CollectionServer(ServerConfig config);
  ~CollectionServer();

  // Serves until stop(); bind failure throws.
  void start();
  void stop();
  int port() const { return config_.listen_port; }

  // Store operations, also reachable over HTTP.
  model::ExperimentManifest publish(const std::string& package_bytes);
  std::string package_bytes(const std::string& experiment_id) const;
  std::vector<model::ExperimentManifest> list_experiments() const;

  // Returns true when the chunk was new, false for a duplicate.
  bool ingest_chunk(const std::string& experiment_id, const std::string& device_id,
                    const std::string& chunk_id, const std::string& body);

  size_t chunks_stored() const;
  size_t experiments_published() const;

 private:
  void route();
  void load_index();
  std::filesystem::path chunk_file(const std::string& experiment_id, const std::string& device_id,
                                   const std::string& chunk_id) const;

  ServerConfig config_;
  std::unique_ptr<httplib::Server> http_;
  std::thread serve_thread_;

  mutable std::mutex mu_;
  std::set<std::string> chunk_index_;  // received chunk_ids
};

}  // namespace probekit::service
