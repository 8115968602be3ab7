#include <random>

#include "doctest.h"
#include "probekit/energy/energy_model.hpp"
#include "test_util.hpp"

using namespace probekit;
using testing::event_cfg;
using testing::polling_cfg;

namespace {

energy::Scenario builtin(const std::string& name, const energy::EnergyParams& p) {
  auto s = energy::builtin_scenario(name, p);
  REQUIRE(s.has_value());
  return *s;
}

double current(const std::string& name, const energy::EnergyParams& p,
               int64_t duration = 600'000) {
  return energy::simulate(builtin(name, p), duration, p).avg_current_ma;
}

}  // namespace

TEST_CASE("committed defaults hit the calibration anchors exactly") {
  energy::EnergyParams p = energy::default_params();
  CHECK(p.awake_overhead_ma == 35.0);
  CHECK(p.governor_scale_down_ms == 100.0);

  double idle = current("idle", p);
  double idle_wl = current("idle_wl", p);
  CHECK(idle_wl - idle == 35.0);  // wakelock cost is the awake overhead, exactly

  double a3 = current("a3", p);
  double a4 = current("a4", p);
  CHECK(a4 / idle_wl >= 2.0);
  CHECK(a3 / idle_wl >= 1.05);
  CHECK(a3 / idle_wl <= 1.25);
}

TEST_CASE("screen-on scenarios add a bounded increment over the screen baseline") {
  energy::EnergyParams p = energy::default_params();
  energy::Scenario screen_idle = builtin("idle", p);
  double base = energy::simulate(screen_idle, 600'000, p, /*screen_on=*/true).avg_current_ma;
  for (const std::string& name : {"b1", "b2", "b3", "b4"}) {
    double inc = (current(name, p) - base) / base;
    CHECK(inc >= 0.02);
    CHECK(inc <= 0.13);
  }
}

TEST_CASE("faster polling never draws less current") {
  energy::EnergyParams p = energy::default_params();
  double prev = 1e9;
  for (double interval : {20.0, 50.0, 100.0, 123.0, 124.0, 125.0, 200.0, 333.0, 500.0, 1000.0,
                          2000.0, 5000.0}) {
    energy::Scenario s;
    s.label = "sweep";
    s.wakelock = true;
    s.polls = {{interval, p.poll_work_ms}};
    double avg = energy::simulate(s, 100'000, p).avg_current_ma;
    CHECK(avg <= prev);
    prev = avg;
  }
}

TEST_CASE("event-only experiments cost the same as idle") {
  energy::EnergyParams p = energy::default_params();
  energy::Scenario s;
  s.label = "events";
  // event plugins contribute no polls and hold no wakelock
  double avg = energy::simulate(s, 60'000, p).avg_current_ma;
  CHECK(avg == current("idle", p));
}

TEST_CASE("coarse polling wakes up per alarm and sleeps in between") {
  energy::EnergyParams p = energy::default_params();
  energy::Scenario s;
  s.label = "coarse";
  s.polls = {{20'000, p.poll_work_ms}};
  energy::EnergyReport r = energy::simulate(s, 400'000, p);
  CHECK(r.wakeup_count == 20);
  CHECK(r.awake_fraction == doctest::Approx(p.coarse_wakeup_ms / 20'000));
  CHECK(r.awake_fraction < 1.0);
}

TEST_CASE("report invariants hold for random scenarios") {
  energy::EnergyParams p = energy::default_params();
  std::mt19937 rng(3);
  for (int trial = 0; trial < 200; trial++) {
    energy::Scenario s;
    s.label = "rand";
    s.wakelock = rng() % 2;
    s.screen_on = rng() % 2;
    s.busy_fraction = (rng() % 100) / 100.0;
    int n = rng() % 4;
    double min_interval = 1e9;
    double sum_high = s.busy_fraction;
    for (int i = 0; i < n; i++) {
      double interval = 20.0 + rng() % 30'000;
      s.polls.push_back({interval, p.poll_work_ms});
      min_interval = std::min(min_interval, interval);
      sum_high += interval <= p.poll_work_ms + p.governor_scale_down_ms
                      ? 1.0
                      : p.poll_work_ms / interval;
    }
    int64_t duration = static_cast<int64_t>(10 * (n ? min_interval : 100)) + 1000;
    energy::EnergyReport r = energy::simulate(s, duration, p);
    CHECK(r.high_freq_fraction <= r.awake_fraction);
    CHECK(r.awake_fraction <= 1.0);
    CHECK(r.high_freq_fraction <= std::min(1.0, sum_high) + 1e-12);
    CHECK(r.avg_current_ma >= p.i_sleep_ma);
    // determinism
    CHECK(energy::simulate(s, duration, p).avg_current_ma == r.avg_current_ma);
  }
}

TEST_CASE("parameters validate and round-trip through json") {
  energy::EnergyParams p = energy::default_params();
  model::json j = p.to_json();
  energy::EnergyParams back = energy::EnergyParams::from_json(j);
  CHECK(back.to_json() == j);

  energy::EnergyParams partial = energy::EnergyParams::from_json({{"i_sleep_ma", 7.5}});
  CHECK(partial.i_sleep_ma == 7.5);
  CHECK(partial.awake_overhead_ma == p.awake_overhead_ma);

  CHECK_THROWS_AS(energy::EnergyParams::from_json({{"i_cpu_high_ma", 0.0}}),
                  energy::EnergyError);
  CHECK_THROWS_AS(energy::EnergyParams::from_json({{"poll_work_ms", -1.0}}),
                  energy::EnergyError);
}

TEST_CASE("simulate rejects degenerate inputs") {
  energy::EnergyParams p = energy::default_params();
  energy::Scenario s;
  s.label = "x";
  s.polls = {{100, p.poll_work_ms}};
  CHECK_THROWS_AS(energy::simulate(s, 500, p), energy::EnergyError);  // < 10x interval
  s.polls = {{0, p.poll_work_ms}};
  CHECK_THROWS_AS(energy::simulate(s, 60'000, p), energy::EnergyError);
  s.polls.clear();
  s.busy_fraction = 1.5;
  CHECK_THROWS_AS(energy::simulate(s, 60'000, p), energy::EnergyError);
}

TEST_CASE("manifest maps onto the model: polls from polling plugins only") {
  energy::EnergyParams p = energy::default_params();
  model::ExperimentManifest m = testing::make_manifest(
      {polling_cfg("synth_sensor", 100), polling_cfg("sys_mem", 2000), event_cfg("clock_events")});
  energy::Scenario s = energy::scenario_from_manifest(m, p);
  CHECK(s.wakelock);  // precise polling requires one
  REQUIRE(s.polls.size() == 2);
  CHECK(s.busy_fraction == 0.0);
  std::vector<double> intervals{s.polls[0].interval_ms, s.polls[1].interval_ms};
  std::sort(intervals.begin(), intervals.end());
  CHECK(intervals == std::vector<double>{100, 2000});

  model::ExperimentManifest events_only = testing::make_manifest({event_cfg("clock_events")});
  energy::Scenario e = energy::scenario_from_manifest(events_only, p);
  CHECK(e.polls.empty());
  CHECK_FALSE(e.wakelock);
}

TEST_CASE("compare reports ratios against the first scenario") {
  energy::EnergyParams p = energy::default_params();
  std::vector<energy::Scenario> scenarios;
  for (const std::string& name : energy::builtin_scenario_names()) {
    scenarios.push_back(builtin(name, p));
  }
  auto rows = energy::compare(scenarios, 600'000, p);
  REQUIRE(rows.size() == scenarios.size());
  CHECK(rows[0].ratio_vs_baseline == 1.0);
  for (const auto& row : rows) {
    CHECK(row.ratio_vs_baseline ==
          doctest::Approx(row.report.avg_current_ma / rows[0].report.avg_current_ma));
  }
  CHECK_FALSE(energy::builtin_scenario("nope", p).has_value());
}
