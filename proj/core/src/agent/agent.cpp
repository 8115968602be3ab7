#include "probekit/agent/agent.hpp"

#include <sodium.h>

#include <iostream>
#include <limits>

#include "httplib.h"
#include "probekit/util/fs.hpp"
#include "probekit/util/hex.hpp"
#include "probekit/util/uuid.hpp"

namespace probekit::agent {

using model::json;

namespace {
constexpr int64_t kBackoffBaseMs = 30'000;
constexpr int64_t kBackoffCapMs = 30 * 60'000;
}  // namespace

std::string origin_name(Origin o) {
  return o == Origin::file_import ? "file_import" : "server_fetch";
}

Agent::Agent(std::filesystem::path home, sched::Clock* clock) : home_(std::move(home)) {
  if (clock) {
    clock_ = clock;
  } else {
    owned_clock_ = std::make_unique<sched::SystemClock>();
    clock_ = owned_clock_.get();
  }
  util::ensure_private_dir(home_);
  for (const char* sub : {"packages", "data", "state", "trusted_keys"}) {
    util::ensure_private_dir(home_ / sub);
  }
  if (!std::filesystem::exists(home_ / "control.token")) {
    if (sodium_init() < 0) throw AgentError("libsodium initialization failed");
    uint8_t secret[32];
    randombytes_buf(secret, sizeof(secret));
    util::atomic_write_file(home_ / "control.token", util::to_hex(secret, sizeof(secret)) + "\n");
  }
  load_settings();
  load_registry();
}

Agent::~Agent() {
  std::lock_guard lock(mu_);
  for (auto& [id, run] : running_) {
    try {
      run.runner->stop();
    } catch (...) {
    }
  }
}

std::string Agent::control_token() const {
  std::string token = util::read_file(home_ / "control.token");
  while (!token.empty() && (token.back() == '\n' || token.back() == '\r')) token.pop_back();
  return token;
}

void Agent::load_settings() {
  std::filesystem::path file = home_ / "agent.json";
  if (std::filesystem::exists(file)) {
    json j = json::parse(util::read_file(file));
    device_id_ = j.value("device_id", std::string(""));
    network_metered_ = j.value("network_metered", false);
    listen_port_ = j.value("listen_port", 8731);
    upload_token_ = j.value("upload_token", std::string(""));
  }
  if (!util::is_uuid(device_id_)) {
    device_id_ = util::uuid4();
    save_settings();
  }
}

void Agent::save_settings() {
  json j{{"device_id", device_id_},
         {"network_metered", network_metered_},
         {"listen_port", listen_port_},
         {"upload_token", upload_token_}};
  util::atomic_write_file(home_ / "agent.json", j.dump(2) + "\n");
}

void Agent::load_registry() {
  registry_.clear();
  std::filesystem::path file = home_ / "installed.json";
  if (!std::filesystem::exists(file)) return;
  json j;
  try {
    j = json::parse(util::read_file(file));
  } catch (const json::exception&) {
    std::cerr << "warning: installed.json corrupt, starting with empty registry\n";
    return;
  }
  for (const json& e : j.value("experiments", json::array())) {
    InstalledExperiment exp;
    exp.experiment_id = e.value("experiment_id", std::string(""));
    exp.version = e.value("version", std::string(""));
    exp.name = e.value("name", std::string(""));
    exp.package_file = e.value("package_file", std::string(""));
    exp.verified = e.value("verified", false);
    exp.install_ts = e.value("install_ts", int64_t{0});
    exp.running = e.value("running", false);
    exp.origin =
        e.value("origin", std::string("file_import")) == "server_fetch" ? Origin::server_fetch
                                                                        : Origin::file_import;
    registry_.push_back(std::move(exp));
  }
}

void Agent::save_registry() const {
  json list = json::array();
  for (const InstalledExperiment& e : registry_) {
    list.push_back({{"experiment_id", e.experiment_id},
                    {"version", e.version},
                    {"name", e.name},
                    {"package_file", e.package_file},
                    {"verified", e.verified},
                    {"install_ts", e.install_ts},
                    {"running", e.running},
                    {"origin", origin_name(e.origin)}});
  }
  util::atomic_write_file(home_ / "installed.json", json{{"experiments", list}}.dump(2) + "\n");
}

InstalledExperiment* Agent::find_entry(const std::string& experiment_id) {
  for (InstalledExperiment& e : registry_) {
    if (e.experiment_id == experiment_id) return &e;
  }
  return nullptr;
}

const InstalledExperiment* Agent::find_entry(const std::string& experiment_id) const {
  return const_cast<Agent*>(this)->find_entry(experiment_id);
}

void Agent::trust_key(const std::filesystem::path& pub_file) {
  pack::SigningKey key = pack::SigningKey::load_public(pub_file);  // validates length
  util::write_file(home_ / "trusted_keys" / (key.fingerprint().substr(0, 16) + ".pub"),
                   util::to_hex(key.public_key) + "\n");
}

std::vector<pack::SigningKey> Agent::trusted_keys() const {
  std::vector<pack::SigningKey> keys;
  for (const auto& entry : std::filesystem::directory_iterator(home_ / "trusted_keys")) {
    if (entry.path().extension() != ".pub") continue;
    try {
      keys.push_back(pack::SigningKey::load_public(entry.path()));
    } catch (const std::exception&) {
    }
  }
  return keys;
}

InstalledExperiment Agent::import_bytes(const std::string& bytes, Origin origin) {
  pack::PackageContents pkg = pack::load_package_bytes(bytes);
  pack::VerifyResult vr = pack::verify_package(pkg, std::nullopt);
  if (!vr.ok) throw AgentError("refusing to install: " + vr.reason);
  std::vector<pack::SigningKey> trusted = trusted_keys();
  if (!trusted.empty()) {
    auto signer = pack::package_signer(pkg);
    bool known = false;
    for (const pack::SigningKey& k : trusted) {
      if (signer && k.public_key == signer->public_key) known = true;
    }
    if (!known) throw AgentError("refusing to install: signer key is not trusted");
  }

  std::lock_guard lock(mu_);
  const model::ExperimentManifest& m = pkg.manifest;
  for (const InstalledExperiment& e : registry_) {
    if (e.experiment_id == m.experiment_id && e.version == m.version) {
      throw AgentError("already installed: " + m.experiment_id + " " + m.version);
    }
  }
  InstalledExperiment exp;
  exp.experiment_id = m.experiment_id;
  exp.version = m.version;
  exp.name = m.name;
  exp.package_file = m.experiment_id + "-" + m.version + ".pkg";
  exp.verified = true;
  exp.install_ts = clock_->now_ms();
  exp.origin = origin;
  util::atomic_write_file(home_ / "packages" / exp.package_file, bytes);
  registry_.push_back(exp);
  save_registry();
  return exp;
}

InstalledExperiment Agent::import_package(const std::filesystem::path& pkg_path, Origin origin) {
  return import_bytes(util::read_file(pkg_path), origin);
}

InstalledExperiment Agent::fetch(const std::string& server_url,
                                 const std::string& experiment_id) {
  httplib::Client client(server_url);
  client.set_read_timeout(10, 0);
  auto res = client.Get("/v1/experiments/" + experiment_id);
  if (!res) throw AgentError("cannot reach server " + server_url);
  if (res->status != 200) {
    throw AgentError("server returned " + std::to_string(res->status) + " for " + experiment_id);
  }
  return import_bytes(res->body, Origin::server_fetch);
}

std::vector<InstalledExperiment> Agent::list() const {
  std::lock_guard lock(mu_);
  return registry_;
}

pack::PackageContents Agent::load_installed_package(const InstalledExperiment& entry) const {
  return pack::load_package(home_ / "packages" / entry.package_file);
}

model::json Agent::info(const std::string& experiment_id) const {
  std::lock_guard lock(mu_);
  const InstalledExperiment* entry = find_entry(experiment_id);
  if (!entry) throw AgentError("not installed: " + experiment_id);
  pack::PackageContents pkg = load_installed_package(*entry);
  const model::ExperimentManifest& m = pkg.manifest;
  json plugins = json::array();
  for (const model::PluginConfig& c : m.plugin_configs) {
    json p{{"plugin_id", c.plugin_id}, {"kind", model::plugin_kind_name(c.kind)}};
    if (c.interval_ms) p["interval_ms"] = *c.interval_ms;
    plugins.push_back(std::move(p));
  }
  json caps = json::array();
  for (model::Capability c : m.capabilities) caps.push_back(model::capability_name(c));
  return json{{"experiment_id", m.experiment_id},
              {"name", m.name},
              {"version", m.version},
              {"author", m.author_name},
              {"author_key_fingerprint", m.author_key_fingerprint},
              {"description", m.description},
              {"plugins", plugins},
              {"capabilities", caps},
              {"upload", {{"enabled", m.upload_policy.enabled},
                          {"server_url", m.upload_policy.server_url},
                          {"unmetered_only", m.upload_policy.unmetered_only},
                          {"delete_after_ack", m.upload_policy.delete_after_ack}}},
              {"verified", entry->verified},
              {"running", entry->running},
              {"origin", origin_name(entry->origin)}};
}

std::unique_ptr<storage::StorageManager> Agent::make_storage(
    const std::string& experiment_id) const {
  storage::StorageConfig config;
  config.data_dir = home_ / "data";
  return std::make_unique<storage::StorageManager>(config, experiment_id, device_id_);
}

void Agent::start_locked(InstalledExperiment& entry) {
  if (running_.count(entry.experiment_id)) {
    throw AgentError("already running: " + entry.experiment_id);
  }
  if (!entry.verified) throw AgentError("not verified: " + entry.experiment_id);
  pack::PackageContents pkg = load_installed_package(entry);
  RunningExperiment run;
  run.storage = make_storage(entry.experiment_id);
  run.bus = std::make_unique<plugins::EventBus>();
  run.runner = std::make_unique<sched::ExperimentRunner>(
      pkg.manifest, *run.storage, *clock_, *run.bus,
      home_ / "state" / (entry.experiment_id + ".json"));
  run.runner->start();
  running_.emplace(entry.experiment_id, std::move(run));
  entry.running = true;
  save_registry();
}

void Agent::start_experiment(const std::string& experiment_id) {
  std::lock_guard lock(mu_);
  InstalledExperiment* entry = find_entry(experiment_id);
  if (!entry) throw AgentError("not installed: " + experiment_id);
  start_locked(*entry);
}

void Agent::stop_experiment(const std::string& experiment_id) {
  std::lock_guard lock(mu_);
  InstalledExperiment* entry = find_entry(experiment_id);
  if (!entry) throw AgentError("not installed: " + experiment_id);
  auto it = running_.find(experiment_id);
  if (it != running_.end()) {
    it->second.runner->stop();
    running_.erase(it);
  }
  if (entry->running) {
    entry->running = false;
    save_registry();
  }
}

model::json Agent::status(const std::string& experiment_id) const {
  std::lock_guard lock(mu_);
  const InstalledExperiment* entry = find_entry(experiment_id);
  if (!entry) throw AgentError("not installed: " + experiment_id);
  auto it = running_.find(experiment_id);
  if (it == running_.end()) {
    return json{{"experiment_id", experiment_id}, {"running", false}};
  }
  sched::RunState state = it->second.runner->status();
  json plugins = json::object();
  for (const auto& [id, counters] : state.plugins) {
    plugins[id] = {{"records_emitted", counters.records_emitted},
                   {"polls_executed", counters.polls_executed},
                   {"last_poll_ts", counters.last_poll_ts},
                   {"missed_deadlines", counters.missed_deadlines}};
  }
  return json{{"experiment_id", experiment_id},
              {"running", true},
              {"started_ts", state.started_ts},
              {"plugins", plugins},
              {"sealed_chunks", static_cast<int64_t>(it->second.storage->list_chunks().size())}};
}

void Agent::restore_running() {
  std::lock_guard lock(mu_);
  for (InstalledExperiment& entry : registry_) {
    if (!entry.running || running_.count(entry.experiment_id)) continue;
    try {
      entry.running = false;  // start_locked flips it back on success
      start_locked(entry);
    } catch (const std::exception& e) {
      std::cerr << "warning: cannot restore " << entry.experiment_id << ": " << e.what() << "\n";
      save_registry();
    }
  }
}

int64_t Agent::advance() {
  std::lock_guard lock(mu_);
  int64_t now = clock_->now_ms();
  int64_t next = std::numeric_limits<int64_t>::max();
  for (auto& [id, run] : running_) {
    run.runner->advance_to(now);
    next = std::min(next, run.runner->next_deadline());
  }
  return next;
}

std::vector<std::string> Agent::dump(const std::string& experiment_id,
                                     const std::filesystem::path& dest_dir) {
  std::lock_guard lock(mu_);
  if (!find_entry(experiment_id)) throw AgentError("not installed: " + experiment_id);
  auto it = running_.find(experiment_id);
  if (it != running_.end()) return it->second.storage->dump(dest_dir);
  return make_storage(experiment_id)->dump(dest_dir);
}

Agent::UploadStats Agent::upload_locked(InstalledExperiment& entry, bool force) {
  UploadStats stats;
  pack::PackageContents pkg = load_installed_package(entry);
  const model::UploadPolicy& policy = pkg.manifest.upload_policy;
  if (!policy.enabled) throw AgentError("upload policy disabled for " + entry.experiment_id);
  if (policy.unmetered_only && network_metered_) {
    stats.skipped_metered = true;
    return stats;  // gate before any transfer attempt
  }
  int64_t now = clock_->now_ms();
  UploadBackoff& backoff = backoff_[entry.experiment_id];
  if (!force && now < backoff.next_attempt_ms) return stats;

  storage::StorageManager* storage;
  std::unique_ptr<storage::StorageManager> own;
  auto it = running_.find(entry.experiment_id);
  if (it != running_.end()) {
    storage = it->second.storage.get();
  } else {
    own = make_storage(entry.experiment_id);
    storage = own.get();
  }

  httplib::Client client(policy.server_url);
  client.set_read_timeout(10, 0);
  bool network_failure = false;
  for (const model::ChunkManifest& chunk : storage->list_chunks()) {
    std::string body = util::read_file(storage->chunk_path(chunk));
    std::string path = "/v1/data/" + chunk.experiment_id + "/" + chunk.device_id + "/" +
                       chunk.chunk_id;
    httplib::Headers headers{{"Authorization", "Bearer " + upload_token_}};
    auto res = client.Post(path, headers, body, "application/zip");
    if (!res) {
      network_failure = true;
      stats.failed++;
      break;  // retry the whole remainder after backoff
    }
    if (res->status == 200) {
      // A duplicate response is still a durable ack.
      json reply = json::parse(res->body, nullptr, false);
      if (reply.is_object() && reply.value("duplicate", false)) stats.duplicates++;
      stats.uploaded++;
      if (policy.delete_after_ack) {
        storage->delete_chunk(chunk.chunk_id);
        stats.deleted++;
      }
    } else {
      // Server rejection: quarantine, never delete silently.
      stats.failed++;
      std::filesystem::path qdir = home_ / "data" / "quarantine";
      util::ensure_private_dir(qdir);
      std::filesystem::path src = storage->chunk_path(chunk);
      std::filesystem::rename(src, qdir / src.filename());
      std::cerr << "warning: chunk " << chunk.chunk_id << " rejected ("
                << res->status << "), quarantined\n";
    }
  }
  if (network_failure) {
    backoff.delay_ms = backoff.delay_ms == 0 ? kBackoffBaseMs
                                             : std::min(backoff.delay_ms * 2, kBackoffCapMs);
    backoff.next_attempt_ms = now + backoff.delay_ms;
  } else {
    backoff = UploadBackoff{};
    last_upload_ms_[entry.experiment_id] = now;
  }
  return stats;
}

Agent::UploadStats Agent::upload_now(const std::string& experiment_id, bool force) {
  std::lock_guard lock(mu_);
  InstalledExperiment* entry = find_entry(experiment_id);
  if (!entry) throw AgentError("not installed: " + experiment_id);
  return upload_locked(*entry, force);
}

void Agent::uploader_tick() {
  std::lock_guard lock(mu_);
  int64_t now = clock_->now_ms();
  for (InstalledExperiment& entry : registry_) {
    pack::PackageContents pkg;
    try {
      pkg = load_installed_package(entry);
    } catch (const std::exception&) {
      continue;
    }
    if (!pkg.manifest.upload_policy.enabled) continue;
    int64_t period_ms = pkg.manifest.upload_policy.period_minutes * 60'000;
    auto last = last_upload_ms_.find(entry.experiment_id);
    if (last != last_upload_ms_.end() && now - last->second < period_ms) continue;
    try {
      upload_locked(entry, /*force=*/false);
    } catch (const std::exception& e) {
      std::cerr << "warning: upload for " << entry.experiment_id << " failed: " << e.what()
                << "\n";
    }
  }
}

bool Agent::network_metered() const { return network_metered_; }

void Agent::set_network_metered(bool metered) {
  network_metered_ = metered;
  save_settings();
}

}  // namespace probekit::agent
