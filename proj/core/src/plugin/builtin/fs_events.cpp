#include <poll.h>
#include <sys/inotify.h>
#include <unistd.h>

#include <atomic>
#include <cstring>
#include <thread>

#include "builtin.hpp"

namespace probekit::plugins::builtin {

using model::Capability;
using model::PluginKind;

namespace {

// Watches one directory via inotify on its own thread; each filesystem
// event becomes one emitted record.
class FsEvents : public PluginInstance {
 public:
  FsEvents(PluginDescriptor d, Options o, Reporter& r)
      : PluginInstance(std::move(d), std::move(o), r), path_(opt_text("path")) {}

  ~FsEvents() override { FsEvents::unsubscribe(); }

  void subscribe(EventBus&) override {
    if (running_.exchange(true)) return;  // idempotent
    fd_ = inotify_init1(IN_NONBLOCK);
    if (fd_ < 0) {
      running_ = false;
      reporter().emit(descriptor().plugin_id, source_unavailable("inotify_init failed"));
      return;
    }
    wd_ = inotify_add_watch(fd_, path_.c_str(),
                            IN_CREATE | IN_MODIFY | IN_DELETE | IN_MOVED_FROM | IN_MOVED_TO |
                                IN_ATTRIB | IN_CLOSE_WRITE);
    if (wd_ < 0) {
      ::close(fd_);
      fd_ = -1;
      running_ = false;
      reporter().emit(descriptor().plugin_id,
                      source_unavailable("cannot watch path: " + path_));
      return;
    }
    thread_ = std::thread([this] { run(); });
  }

  void unsubscribe() override {
    if (!running_.exchange(false)) return;
    if (thread_.joinable()) thread_.join();
    if (wd_ >= 0) inotify_rm_watch(fd_, wd_);
    if (fd_ >= 0) ::close(fd_);
    fd_ = wd_ = -1;
  }

 private:
  void run() {
    char buf[4096];
    while (running_) {
      struct pollfd pfd {fd_, POLLIN, 0};
      int pr = ::poll(&pfd, 1, 50);
      if (pr <= 0) continue;
      ssize_t n = ::read(fd_, buf, sizeof(buf));
      if (n <= 0) continue;
      ssize_t off = 0;
      while (off < n) {
        auto* ev = reinterpret_cast<struct inotify_event*>(buf + off);
        const char* kind = "other";
        if (ev->mask & IN_CREATE) kind = "create";
        else if (ev->mask & (IN_MODIFY | IN_CLOSE_WRITE)) kind = "modify";
        else if (ev->mask & IN_DELETE) kind = "delete";
        else if (ev->mask & IN_MOVED_FROM) kind = "moved_from";
        else if (ev->mask & IN_MOVED_TO) kind = "moved_to";
        else if (ev->mask & IN_ATTRIB) kind = "attrib";
        std::string name = ev->len > 0 ? std::string(ev->name) : std::string();
        reporter().emit(descriptor().plugin_id,
                        model::json{{"event", kind}, {"name", name}, {"dir", path_}});
        off += static_cast<ssize_t>(sizeof(struct inotify_event)) + ev->len;
      }
    }
  }

  std::string path_;
  std::atomic<bool> running_{false};
  int fd_ = -1;
  int wd_ = -1;
  std::thread thread_;
};

}  // namespace

PluginDescriptor fs_events_descriptor() {
  PluginDescriptor d;
  d.plugin_id = "fs_events";
  d.kind = PluginKind::event;
  d.author = "probekit";
  d.description = "Filesystem activity in a watched directory";
  d.required_capabilities = {Capability::FS_EVENTS};
  d.option_schema = {
      {"path", OptionType::text, model::OptionValue(std::string("/tmp")), {}, {}, {}},
  };
  return d;
}

std::unique_ptr<PluginInstance> make_fs_events(const Options& options, Reporter& reporter) {
  return std::make_unique<FsEvents>(fs_events_descriptor(), options, reporter);
}

}  // namespace probekit::plugins::builtin
