// Self-hosted collection server: experiment distribution plus durable,
// deduplicated chunk ingestion.

#include <unistd.h>

#include <csignal>
#include <iostream>

#include "CLI11.hpp"
#include "probekit/service/server.hpp"
#include "probekit/util/fs.hpp"

using namespace probekit;

namespace {
service::CollectionServer* g_server = nullptr;
void handle_signal(int) {
  if (g_server) g_server->stop();
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"probekit collection server"};
  std::string root, listen = "127.0.0.1:8750", token_file;
  app.add_option("--root", root, "Store directory")->required();
  app.add_option("--listen", listen, "host:port");
  app.add_option("--token-file", token_file, "File holding the bearer token")->required();
  CLI11_PARSE(app, argc, argv);

  try {
    service::ServerConfig config;
    config.root = root;
    auto colon = listen.rfind(':');
    if (colon == std::string::npos) {
      std::cerr << "error: --listen must be host:port\n";
      return 1;
    }
    config.listen_host = listen.substr(0, colon);
    config.listen_port = std::stoi(listen.substr(colon + 1));
    config.token = util::read_file(token_file);
    while (!config.token.empty() &&
           (config.token.back() == '\n' || config.token.back() == '\r')) {
      config.token.pop_back();
    }

    service::CollectionServer server(std::move(config));
    g_server = &server;
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    server.start();
    std::cout << "serving " << listen << " from " << root << "\n";
    // start() returns immediately; block until stop() via the serve thread
    pause();
    server.stop();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
