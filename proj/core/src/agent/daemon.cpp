#include "probekit/agent/daemon.hpp"

#include <chrono>

#include "httplib.h"

namespace probekit::agent {

using model::json;

AgentDaemon::AgentDaemon(Agent& agent) : agent_(agent) {
  http_ = std::make_unique<httplib::Server>();
  route();
}

AgentDaemon::~AgentDaemon() { stop(); }

int AgentDaemon::port() const { return agent_.listen_port(); }

void AgentDaemon::route() {
  auto guarded = [this](auto handler) {
    return [this, handler](const httplib::Request& req, httplib::Response& res) {
      if (req.get_header_value("X-Probekit-Token") != agent_.control_token()) {
        res.status = 401;
        res.set_content(json{{"error", "missing or bad control token"}}.dump(),
                        "application/json");
        return;
      }
      try {
        res.set_content(handler(req).dump(), "application/json");
      } catch (const std::exception& e) {
        res.status = 400;
        res.set_content(json{{"error", e.what()}}.dump(), "application/json");
      }
    };
  };

  http_->Get("/v1/ping", guarded([this](const httplib::Request&) {
               return json{{"ok", true}, {"device_id", agent_.device_id()}};
             }));
  http_->Get("/v1/list", guarded([this](const httplib::Request&) {
               json list = json::array();
               for (const InstalledExperiment& e : agent_.list()) {
                 list.push_back({{"experiment_id", e.experiment_id},
                                 {"version", e.version},
                                 {"name", e.name},
                                 {"verified", e.verified},
                                 {"running", e.running},
                                 {"origin", origin_name(e.origin)}});
               }
               return list;
             }));
  http_->Post(R"(/v1/start/([^/]+))", guarded([this](const httplib::Request& req) {
                agent_.start_experiment(req.matches[1]);
                return json{{"started", true}};
              }));
  http_->Post(R"(/v1/stop/([^/]+))", guarded([this](const httplib::Request& req) {
                agent_.stop_experiment(req.matches[1]);
                return json{{"stopped", true}};
              }));
  http_->Get(R"(/v1/status/([^/]+))", guarded([this](const httplib::Request& req) {
               return agent_.status(req.matches[1]);
             }));
  http_->Post(R"(/v1/upload/([^/]+))", guarded([this](const httplib::Request& req) {
                Agent::UploadStats s = agent_.upload_now(req.matches[1]);
                return json{{"uploaded", s.uploaded},
                            {"duplicates", s.duplicates},
                            {"deleted", s.deleted},
                            {"failed", s.failed},
                            {"skipped_metered", s.skipped_metered}};
              }));
}

void AgentDaemon::start() {
  agent_.restore_running();
  if (!http_->bind_to_port("127.0.0.1", agent_.listen_port())) {
    throw AgentError("cannot bind control port " + std::to_string(agent_.listen_port()));
  }
  serve_thread_ = std::thread([this] { http_->listen_after_bind(); });
  http_->wait_until_ready();
  sched_thread_ = std::thread([this] { scheduler_loop(); });
}

void AgentDaemon::scheduler_loop() {
  using namespace std::chrono;
  auto last_upload_check = steady_clock::now();
  while (!stopping_) {
    agent_.advance();
    if (steady_clock::now() - last_upload_check >= seconds(5)) {
      agent_.uploader_tick();
      last_upload_check = steady_clock::now();
    }
    std::this_thread::sleep_for(milliseconds(10));
  }
}

void AgentDaemon::wait() {
  if (sched_thread_.joinable()) sched_thread_.join();
  if (serve_thread_.joinable()) serve_thread_.join();
}

void AgentDaemon::stop() {
  stopping_ = true;
  if (http_) http_->stop();
  if (sched_thread_.joinable()) sched_thread_.join();
  if (serve_thread_.joinable()) serve_thread_.join();
}

AgentClient::AgentClient(int port, std::string token) : port_(port), token_(std::move(token)) {}

static json do_request(int port, const std::string& token, const std::string& path, bool post) {
  httplib::Client client("127.0.0.1", port);
  client.set_read_timeout(10, 0);
  httplib::Headers headers{{"X-Probekit-Token", token}};
  auto res = post ? client.Post(path, headers, "", "application/json")
                  : client.Get(path, headers);
  if (!res) throw AgentError("agent daemon not reachable on port " + std::to_string(port));
  json body = json::parse(res->body, nullptr, false);
  if (res->status != 200) {
    std::string detail = body.is_object() ? body.value("error", res->body) : res->body;
    throw AgentError("daemon error (" + std::to_string(res->status) + "): " + detail);
  }
  return body;
}

json AgentClient::get(const std::string& path) { return do_request(port_, token_, path, false); }
json AgentClient::post(const std::string& path) { return do_request(port_, token_, path, true); }

}  // namespace probekit::agent
