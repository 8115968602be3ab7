#include "probekit/service/server.hpp"

#include "httplib.h"

#include "probekit/pack/package.hpp"
#include "probekit/storage/storage_manager.hpp"
#include "probekit/util/fs.hpp"
#include "probekit/util/zipfile.hpp"

namespace probekit::service {

using model::json;

CollectionServer::CollectionServer(ServerConfig config) : config_(std::move(config)) {
  util::ensure_private_dir(config_.root);
  util::ensure_private_dir(config_.root / "experiments");
  util::ensure_private_dir(config_.root / "data");
  load_index();
  http_ = std::make_unique<httplib::Server>();
  route();
}

CollectionServer::~CollectionServer() { stop(); }

void CollectionServer::load_index() {
  // Invariant: a chunk file exists iff its id is indexed, so the index is
  // just the file set and survives restarts for free.
  std::lock_guard lock(mu_);
  chunk_index_.clear();
  for (const auto& entry :
       std::filesystem::recursive_directory_iterator(config_.root / "data")) {
    if (entry.is_regular_file() && entry.path().extension() == ".zip") {
      chunk_index_.insert(entry.path().stem().string());
    }
  }
}

std::filesystem::path CollectionServer::chunk_file(const std::string& experiment_id,
                                                   const std::string& device_id,
                                                   const std::string& chunk_id) const {
  return config_.root / "data" / experiment_id / device_id / (chunk_id + ".zip");
}

model::ExperimentManifest CollectionServer::publish(const std::string& package_bytes) {
  pack::PackageContents pkg = pack::load_package_bytes(package_bytes);
  pack::VerifyResult vr = pack::verify_package(pkg, std::nullopt);
  if (!pkg.signature_bytes) throw ServiceError("package is unsigned");
  const model::ExperimentManifest& m = pkg.manifest;
  std::filesystem::path dir = config_.root / "experiments" / m.experiment_id;
  std::filesystem::path file = dir / (m.version + ".pkg");
  {
    std::lock_guard lock(mu_);
    if (std::filesystem::exists(file)) {
      throw ServiceError("duplicate: " + m.experiment_id + " " + m.version);
    }
    util::ensure_private_dir(dir);
    util::atomic_write_file(file, package_bytes);
  }
  (void)vr;  // signature validity is the importer's call; storage only needs structure
  return m;
}

std::string CollectionServer::package_bytes(const std::string& experiment_id) const {
  std::filesystem::path dir = config_.root / "experiments" / experiment_id;
  if (!std::filesystem::exists(dir)) throw ServiceError("unknown experiment: " + experiment_id);
  // Highest version wins when several are published.
  std::filesystem::path best;
  std::string best_version;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".pkg") continue;
    std::string version = entry.path().stem().string();
    if (best.empty() || model::compare_versions(version, best_version) > 0) {
      best = entry.path();
      best_version = version;
    }
  }
  if (best.empty()) throw ServiceError("unknown experiment: " + experiment_id);
  return util::read_file(best);
}

std::vector<model::ExperimentManifest> CollectionServer::list_experiments() const {
  std::vector<model::ExperimentManifest> result;
  std::vector<std::filesystem::path> files;
  for (const auto& dir :
       std::filesystem::directory_iterator(config_.root / "experiments")) {
    if (!dir.is_directory()) continue;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (entry.path().extension() == ".pkg") files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    try {
      result.push_back(pack::load_package_bytes(util::read_file(file)).manifest);
    } catch (const std::exception&) {
      // unreadable entries are skipped, not fatal to listing
    }
  }
  return result;
}

bool CollectionServer::ingest_chunk(const std::string& experiment_id,
                                    const std::string& device_id, const std::string& chunk_id,
                                    const std::string& body) {
  // Parse + CRC-verify before touching the store.
  storage::ChunkContents chunk;
  {
    if (!util::has_valid_archive_crc(body)) throw ServiceError("archive crc trailer mismatch");
    util::ZipReader zip{std::string(body)};
    chunk.manifest = model::chunk_manifest_from_json(json::parse(zip.read("manifest.json")));
    std::string records = zip.read("records.jsonl");
    if (util::crc32_of(records) != chunk.manifest.records_crc32) {
      throw ServiceError("records crc mismatch");
    }
  }
  if (chunk.manifest.experiment_id != experiment_id || chunk.manifest.device_id != device_id ||
      chunk.manifest.chunk_id != chunk_id) {
    throw ServiceError("chunk ids do not match the upload path");
  }
  std::lock_guard lock(mu_);
  if (chunk_index_.count(chunk_id)) return false;
  std::filesystem::path file = chunk_file(experiment_id, device_id, chunk_id);
  util::ensure_private_dir(file.parent_path());
  util::atomic_write_file(file, body);  // fsynced before rename: ack implies durability
  chunk_index_.insert(chunk_id);
  return true;
}

size_t CollectionServer::chunks_stored() const {
  std::lock_guard lock(mu_);
  return chunk_index_.size();
}

size_t CollectionServer::experiments_published() const {
  size_t n = 0;
  for (const auto& dir :
       std::filesystem::directory_iterator(config_.root / "experiments")) {
    if (!dir.is_directory()) continue;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (entry.path().extension() == ".pkg") n++;
    }
  }
  return n;
}

void CollectionServer::route() {
  auto authorized = [this](const httplib::Request& req) {
    return req.get_header_value("Authorization") == "Bearer " + config_.token;
  };

  http_->Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
    json body{{"status", "ok"},
              {"chunks_stored", chunks_stored()},
              {"experiments_published", experiments_published()}};
    res.set_content(body.dump(), "application/json");
  });

  http_->Get("/v1/experiments", [this](const httplib::Request&, httplib::Response& res) {
    json body = json::array();
    for (const auto& m : list_experiments()) {
      body.push_back({{"experiment_id", m.experiment_id},
                      {"name", m.name},
                      {"version", m.version},
                      {"author", m.author_name},
                      {"fingerprint", m.author_key_fingerprint}});
    }
    res.set_content(body.dump(), "application/json");
  });

  http_->Get(R"(/v1/experiments/([0-9a-fA-F-]+))",
             [this](const httplib::Request& req, httplib::Response& res) {
               try {
                 res.set_content(package_bytes(req.matches[1]), "application/zip");
               } catch (const std::exception& e) {
                 res.status = 404;
                 res.set_content(json{{"error", e.what()}}.dump(), "application/json");
               }
             });

  http_->Post("/v1/experiments", [this, authorized](const httplib::Request& req,
                                                    httplib::Response& res) {
    if (!authorized(req)) {
      res.status = 401;
      res.set_content(json{{"error", "bad token"}}.dump(), "application/json");
      return;
    }
    try {
      model::ExperimentManifest m = publish(req.body);
      res.set_content(json{{"experiment_id", m.experiment_id}, {"version", m.version}}.dump(),
                      "application/json");
    } catch (const std::exception& e) {
      std::string what = e.what();
      res.status = what.rfind("duplicate", 0) == 0 ? 409 : 400;
      res.set_content(json{{"error", what}}.dump(), "application/json");
    }
  });

  http_->Post(R"(/v1/data/([^/]+)/([^/]+)/([^/]+))",
              [this, authorized](const httplib::Request& req, httplib::Response& res) {
                if (!authorized(req)) {
                  res.status = 401;
                  res.set_content(json{{"error", "bad token"}}.dump(), "application/json");
                  return;
                }
                try {
                  bool fresh = ingest_chunk(req.matches[1], req.matches[2], req.matches[3],
                                            req.body);
                  res.set_content(json{{"stored", true}, {"duplicate", !fresh}}.dump(),
                                  "application/json");
                } catch (const std::exception& e) {
                  res.status = 400;
                  res.set_content(json{{"error", e.what()}}.dump(), "application/json");
                }
              });
}

void CollectionServer::start() {
  if (!http_->bind_to_port(config_.listen_host, config_.listen_port)) {
    throw ServiceError("cannot bind " + config_.listen_host + ":" +
                       std::to_string(config_.listen_port));
  }
  serve_thread_ = std::thread([this] { http_->listen_after_bind(); });
  http_->wait_until_ready();
}

void CollectionServer::stop() {
  if (http_) http_->stop();
  if (serve_thread_.joinable()) serve_thread_.join();
}

}  // namespace probekit::service
