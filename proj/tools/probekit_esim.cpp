// Duty-cycle energy simulator: built-in scenarios or a manifest, text or
// JSON report.

#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "probekit/energy/energy_model.hpp"
#include "probekit/pack/package.hpp"
#include "probekit/util/fs.hpp"

using namespace probekit;

int main(int argc, char** argv) {
  CLI::App app{"probekit energy simulator"};
  std::vector<std::string> scenario_names;
  std::string manifest_path, params_path;
  int64_t duration_ms = 600'000;
  bool screen_on = false, as_json = false;
  app.add_option("--scenario", scenario_names,
                 "Built-in scenario (repeatable): idle idle_wl a1..a4 b1..b4");
  app.add_option("--manifest", manifest_path, "Simulate an experiment package or manifest JSON");
  app.add_option("--duration", duration_ms, "Simulated duration in ms");
  app.add_option("--params", params_path, "Model parameter JSON file");
  app.add_flag("--screen-on", screen_on, "Hold the device awake with the screen baseline");
  app.add_flag("--json", as_json, "JSON output");
  CLI11_PARSE(app, argc, argv);

  try {
    energy::EnergyParams params = params_path.empty()
                                      ? energy::default_params()
                                      : energy::EnergyParams::from_file(params_path);
    std::vector<energy::Scenario> scenarios;
    for (const std::string& name : scenario_names) {
      auto s = energy::builtin_scenario(name, params);
      if (!s) {
        std::cerr << "error: unknown scenario " << name << "\n";
        return 1;
      }
      if (screen_on) s->screen_on = true;
      scenarios.push_back(std::move(*s));
    }
    if (!manifest_path.empty()) {
      model::ExperimentManifest m;
      try {
        m = pack::load_package(manifest_path).manifest;
      } catch (const std::exception&) {
        m = model::parse_manifest(util::read_file(manifest_path));
      }
      energy::Scenario s = energy::scenario_from_manifest(m, params);
      if (screen_on) s.screen_on = true;
      scenarios.push_back(std::move(s));
    }
    if (scenarios.empty()) {
      std::cerr << "error: give --scenario or --manifest\n";
      return 1;
    }

    std::vector<energy::CompareRow> rows = energy::compare(scenarios, duration_ms, params);
    if (as_json) {
      model::json out = model::json::array();
      for (const auto& row : rows) {
        model::json j = row.report.to_json();
        j["ratio_vs_first"] = row.ratio_vs_baseline;
        out.push_back(std::move(j));
      }
      std::cout << out.dump(2) << "\n";
    } else {
      std::printf("%-12s %12s %8s %8s %9s %8s\n", "scenario", "avg_mA", "awake", "high",
                  "wakeups", "ratio");
      for (const auto& row : rows) {
        const energy::EnergyReport& r = row.report;
        std::printf("%-12s %12.3f %8.3f %8.3f %9lld %8.3f\n", r.label.c_str(), r.avg_current_ma,
                    r.awake_fraction, r.high_freq_fraction,
                    static_cast<long long>(r.wakeup_count), row.ratio_vs_baseline);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
