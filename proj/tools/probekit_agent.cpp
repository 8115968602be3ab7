// Device-side agent CLI. import/fetch/list/info/dump/trust work offline
// against PROBEKIT_HOME; start/stop/status/upload talk to a running daemon
// over the token-guarded control channel.

#include <csignal>
#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "probekit/agent/daemon.hpp"
#include "probekit/util/fs.hpp"

using namespace probekit;

namespace {

std::filesystem::path agent_home() {
  const char* env = std::getenv("PROBEKIT_HOME");
  if (env && *env) return env;
  const char* home = std::getenv("HOME");
  return std::filesystem::path(home ? home : ".") / ".probekit";
}

std::string control_token(const agent::Agent& a) {
  const char* file = std::getenv("PROBEKIT_TOKEN_FILE");
  if (file && *file) {
    std::string token = util::read_file(file);
    while (!token.empty() && (token.back() == '\n' || token.back() == '\r')) token.pop_back();
    return token;
  }
  return a.control_token();
}

agent::AgentDaemon* g_daemon = nullptr;
void handle_signal(int) {
  if (g_daemon) g_daemon->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"probekit device agent"};
  app.require_subcommand(1);

  app.add_subcommand("daemon", "Run the agent daemon (restores running experiments)");
  app.add_subcommand("list", "List installed experiments");

  auto* import_cmd = app.add_subcommand("import", "Import a package file");
  std::string pkg_path;
  import_cmd->add_option("package", pkg_path)->required();

  auto* fetch = app.add_subcommand("fetch", "Fetch a package from a collection server");
  std::string server_url, fetch_id;
  fetch->add_option("--server", server_url)->required();
  fetch->add_option("--id", fetch_id)->required();

  auto* trust = app.add_subcommand("trust", "Add an author public key to the trusted set");
  std::string trust_pub;
  trust->add_option("key", trust_pub, "Public key file")->required();

  std::string exp_id;
  auto* info = app.add_subcommand("info", "Show experiment details");
  info->add_option("id", exp_id)->required();
  auto* start = app.add_subcommand("start", "Start an experiment (daemon required)");
  start->add_option("id", exp_id)->required();
  auto* stop = app.add_subcommand("stop", "Stop an experiment (daemon required)");
  stop->add_option("id", exp_id)->required();
  auto* status = app.add_subcommand("status", "Experiment status (daemon required)");
  status->add_option("id", exp_id)->required();
  auto* upload = app.add_subcommand("upload", "Upload sealed chunks now (daemon required)");
  upload->add_option("id", exp_id)->required();

  auto* dump = app.add_subcommand("dump", "Copy sealed chunks to a directory");
  std::string dump_dest;
  dump->add_option("id", exp_id)->required();
  dump->add_option("dest", dump_dest)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    agent::Agent a(agent_home());
    if (app.got_subcommand("daemon")) {
      agent::AgentDaemon daemon(a);
      g_daemon = &daemon;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      daemon.start();
      std::cout << "agent daemon on 127.0.0.1:" << daemon.port() << " home " << a.home()
                << "\n";
      daemon.wait();
    } else if (app.got_subcommand("import")) {
      agent::InstalledExperiment e = a.import_package(pkg_path);
      std::cout << "installed " << e.experiment_id << " " << e.version << "\n";
    } else if (app.got_subcommand("fetch")) {
      agent::InstalledExperiment e = a.fetch(server_url, fetch_id);
      std::cout << "installed " << e.experiment_id << " " << e.version << "\n";
    } else if (app.got_subcommand("trust")) {
      a.trust_key(trust_pub);
      std::cout << "trusted\n";
    } else if (app.got_subcommand("list")) {
      for (const agent::InstalledExperiment& e : a.list()) {
        std::cout << e.experiment_id << " " << e.version << " " << e.name
                  << (e.running ? " [running]" : "") << "\n";
      }
    } else if (app.got_subcommand("info")) {
      std::cout << a.info(exp_id).dump(2) << "\n";
    } else if (app.got_subcommand("dump")) {
      for (const std::string& f : a.dump(exp_id, dump_dest)) std::cout << f << "\n";
    } else {
      // daemon-side commands go through the control channel
      agent::AgentClient client(a.listen_port(), control_token(a));
      if (app.got_subcommand("start")) {
        client.post("/v1/start/" + exp_id);
        std::cout << "started\n";
      } else if (app.got_subcommand("stop")) {
        client.post("/v1/stop/" + exp_id);
        std::cout << "stopped\n";
      } else if (app.got_subcommand("status")) {
        std::cout << client.get("/v1/status/" + exp_id).dump(2) << "\n";
      } else if (app.got_subcommand("upload")) {
        std::cout << client.post("/v1/upload/" + exp_id).dump(2) << "\n";
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
