// Grid search that fixed the committed energy-model defaults.
//
// Fixed from the targets: awake_overhead = 35 mA, governor scale-down =
// 100 ms. Searched: i_sleep, i_cpu_high, poll_work_ms. Constraints:
//   A4 / Idle_wl            >= 2.0
//   A3 / Idle_wl            in [1.05, 1.25], as close to 1.12 as possible
//   event-only vs Idle      <= 1.01
// Prints the best parameter set; the winner is hard-coded as the library
// default (i_sleep 15.0, i_cpu_high 50.0, poll_work 24.0).

#include <cmath>
#include <cstdio>

#include "probekit/energy/energy_model.hpp"

using namespace probekit::energy;

int main() {
  const int64_t duration = 600'000;
  double best_score = 1e9;
  EnergyParams best;
  for (double i_sleep = 4; i_sleep <= 20; i_sleep += 1) {
    for (double i_cpu = 30; i_cpu <= 120; i_cpu += 5) {
      for (double work = 1; work <= 40; work += 1) {
        EnergyParams p;
        p.i_sleep_ma = i_sleep;
        p.i_cpu_high_ma = i_cpu;
        p.poll_work_ms = work;
        auto run = [&](const char* name) {
          return simulate(*builtin_scenario(name, p), duration, p).avg_current_ma;
        };
        double idle = run("idle");
        double idle_wl = run("idle_wl");
        double a3 = run("a3");
        double a4 = run("a4");
        if (a4 / idle_wl < 2.0) continue;
        double r3 = a3 / idle_wl;
        if (r3 < 1.05 || r3 > 1.25) continue;
        Scenario event_only;
        event_only.label = "event";
        double ev = simulate(event_only, duration, p).avg_current_ma;
        if (ev / idle > 1.01) continue;
        double score = std::fabs(r3 - 1.12);
        if (score < best_score) {
          best_score = score;
          best = p;
        }
      }
    }
  }
  if (best_score == 1e9) {
    std::printf("no parameter set satisfies all constraints\n");
    return 1;
  }
  std::printf("best: i_sleep=%.1f i_cpu_high=%.1f poll_work_ms=%.1f (|A3 ratio - 1.12| = %.4f)\n",
              best.i_sleep_ma, best.i_cpu_high_ma, best.poll_work_ms, best_score);
  return 0;
}
