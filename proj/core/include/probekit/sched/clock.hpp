#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>

namespace probekit::sched {

class Clock {
 public:
  virtual ~Clock() = default;
  virtual int64_t now_ms() const = 0;
};

class SystemClock : public Clock {
 public:
  int64_t now_ms() const override {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  }
};

// Time is whatever the test/driver sets it to. The experiment runner steps
// a simulated clock through every timer deadline, so runs are fully
// deterministic.
class SimulatedClock : public Clock {
 public:
  explicit SimulatedClock(int64_t start_ms = 1) : now_(start_ms) {}

  int64_t now_ms() const override { return now_.load(); }
  void set(int64_t t) { now_.store(t); }
  void advance(int64_t delta) { now_.fetch_add(delta); }

 private:
  std::atomic<int64_t> now_;
};

}  // namespace probekit::sched
