#pragma once

#include <atomic>
#include <memory>
#include <thread>

#include "probekit/agent/agent.hpp"

namespace httplib {
class Server;
}

namespace probekit::agent {

// Local control channel (loopback HTTP) plus the real-time scheduling and
// uploader loop. Every command must carry the control token; a request
// without it is rejected, so only local processes that can read the
// owner-only token file can drive the agent.
class AgentDaemon {
 public:
  explicit AgentDaemon(Agent& agent);
  ~AgentDaemon();

  // Restores the persisted running set, binds the control port and starts
  // the loops. Non-blocking; wait() blocks until stop().
  void start();
  void wait();
  void stop();
  int port() const;

 private:
  void route();
  void scheduler_loop();

  Agent& agent_;
  std::unique_ptr<httplib::Server> http_;
  std::thread serve_thread_;
  std::thread sched_thread_;
  std::atomic<bool> stopping_{false};
};

// Client side of the control channel, used by the CLI.
class AgentClient {
 public:
  AgentClient(int port, std::string token);

  model::json get(const std::string& path);
  model::json post(const std::string& path);

 private:
  int port_;
  std::string token_;
};

}  // namespace probekit::agent
