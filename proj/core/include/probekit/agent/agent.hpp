#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "probekit/pack/package.hpp"
#include "probekit/sched/runner.hpp"
#include "probekit/storage/storage_manager.hpp"

namespace probekit::agent {

class AgentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Origin { file_import, server_fetch };
std::string origin_name(Origin o);

// Registry entry; only imported experiments are listable or startable.
struct InstalledExperiment {
  std::string experiment_id;
  std::string version;
  std::string name;
  std::string package_file;  // relative to <home>/packages
  bool verified = false;
  int64_t install_ts = 0;
  bool running = false;
  Origin origin = Origin::file_import;
};

// Device-side state root:
//   <home>/agent.json       device identity and local settings
//   <home>/control.token    256-bit control-channel secret, owner-only
//   <home>/trusted_keys/    author public keys accepted at import
//   <home>/installed.json   install registry
//   <home>/packages/        imported package files
//   <home>/data/            storage manager roots
//   <home>/state/           persisted run state per experiment
//
// The Agent owns registry and runtime state; the daemon wraps it with a
// token-guarded local HTTP control channel and a scheduling loop.
class Agent {
 public:
  // clock may be a SimulatedClock for deterministic tests; defaults to the
  // system clock. The caller keeps ownership.
  explicit Agent(std::filesystem::path home, sched::Clock* clock = nullptr);
  ~Agent();

  const std::string& device_id() const { return device_id_; }
  const std::filesystem::path& home() const { return home_; }
  std::string control_token() const;

  // --- trust & import -----------------------------------------------------
  void trust_key(const std::filesystem::path& pub_file);
  std::vector<pack::SigningKey> trusted_keys() const;

  // Rejects unsigned or tamper-failing packages outright. With trusted keys
  // installed, the signer must be one of them.
  InstalledExperiment import_package(const std::filesystem::path& pkg_path,
                                     Origin origin = Origin::file_import);
  InstalledExperiment import_bytes(const std::string& bytes, Origin origin);
  InstalledExperiment fetch(const std::string& server_url, const std::string& experiment_id);

  std::vector<InstalledExperiment> list() const;
  model::json info(const std::string& experiment_id) const;

  // --- runtime ------------------------------------------------------------
  void start_experiment(const std::string& experiment_id);
  void stop_experiment(const std::string& experiment_id);  // no-op when stopped
  model::json status(const std::string& experiment_id) const;

  // Restarts everything the registry marks running; a missing package
  // demotes the entry to stopped with a warning on stderr.
  void restore_running();

  // Drives all running experiments up to the clock's now. Returns the
  // earliest next deadline (INT64_MAX when nothing is scheduled).
  int64_t advance();

  // --- data ---------------------------------------------------------------
  std::vector<std::string> dump(const std::string& experiment_id,
                                const std::filesystem::path& dest_dir);

  struct UploadStats {
    int uploaded = 0;
    int duplicates = 0;
    int deleted = 0;
    int failed = 0;
    bool skipped_metered = false;
  };
  // One synchronous pass over sealed chunks; force bypasses retry backoff.
  // Metered gating applies regardless of force.
  UploadStats upload_now(const std::string& experiment_id, bool force = true);

  // Periodic uploader step for the daemon loop: every experiment with an
  // enabled policy, honoring period, backoff and gating.
  void uploader_tick();

  bool network_metered() const;
  void set_network_metered(bool metered);

  int listen_port() const { return listen_port_; }

 private:
  struct RunningExperiment {
    std::unique_ptr<storage::StorageManager> storage;
    std::unique_ptr<plugins::EventBus> bus;
    std::unique_ptr<sched::ExperimentRunner> runner;
  };
  struct UploadBackoff {
    int64_t next_attempt_ms = 0;
    int64_t delay_ms = 0;
  };

  void load_settings();
  void save_settings();
  void load_registry();
  void save_registry() const;
  InstalledExperiment* find_entry(const std::string& experiment_id);
  const InstalledExperiment* find_entry(const std::string& experiment_id) const;
  pack::PackageContents load_installed_package(const InstalledExperiment& entry) const;
  std::unique_ptr<storage::StorageManager> make_storage(const std::string& experiment_id) const;
  void start_locked(InstalledExperiment& entry);
  UploadStats upload_locked(InstalledExperiment& entry, bool force);

  std::filesystem::path home_;
  sched::Clock* clock_;
  std::unique_ptr<sched::Clock> owned_clock_;
  std::string device_id_;
  bool network_metered_ = false;
  int listen_port_ = 8731;
  std::string upload_token_;

  mutable std::recursive_mutex mu_;
  std::vector<InstalledExperiment> registry_;
  std::map<std::string, RunningExperiment> running_;
  std::map<std::string, UploadBackoff> backoff_;
  std::map<std::string, int64_t> last_upload_ms_;
};

}  // namespace probekit::agent
