#include <benchmark/benchmark.h>

#include <filesystem>

#include "probekit/energy/energy_model.hpp"
#include "probekit/model/manifest.hpp"
#include "probekit/pack/package.hpp"
#include "probekit/plugin/registry.hpp"
#include "probekit/sched/clock.hpp"
#include "probekit/storage/storage_manager.hpp"
#include "probekit/util/uuid.hpp"
#include "probekit/util/zipfile.hpp"

using namespace probekit;

namespace {

model::ExperimentManifest sample_manifest() {
  model::ExperimentManifest m;
  m.experiment_id = "11111111-1111-4111-8111-111111111111";
  m.name = "bench";
  m.version = "1.0";
  m.author_name = "bench";
  m.author_key_fingerprint = std::string(64, '0');
  m.created_ts = 1'700'000'000'000;
  model::PluginConfig c;
  c.plugin_id = "synth_sensor";
  c.kind = model::PluginKind::polling;
  c.interval_ms = 100;
  m.plugin_configs = {c};
  m.capabilities = {model::Capability::SENSOR_SYNTH};
  return m;
}

std::string sensor_stream(size_t records) {
  std::string out;
  sched::SimulatedClock clock(0);
  struct : plugins::Reporter {
    void emit(const std::string&, const model::json&) override {}
    void emit_blob(const std::string&, const std::string&, const std::vector<uint8_t>&) override {}
  } sink;
  auto sensor = plugins::Registry::instantiate("synth_sensor", {}, sink);
  for (size_t i = 0; i < records; i++) {
    for (const auto& payload : sensor->poll(clock.now_ms())) {
      model::LogRecord r;
      r.ts_ms = clock.now_ms();
      r.plugin_id = "synth_sensor";
      r.seq = static_cast<int64_t>(i);
      r.payload = payload;
      out += model::record_to_line(r) + "\n";
    }
    clock.advance(100);
  }
  return out;
}

void bm_canonicalize_manifest(benchmark::State& state) {
  model::ExperimentManifest m = sample_manifest();
  for (auto _ : state) {
    benchmark::DoNotOptimize(model::canonicalize_manifest(m));
  }
}
BENCHMARK(bm_canonicalize_manifest);

void bm_record_round_trip(benchmark::State& state) {
  model::LogRecord r;
  r.ts_ms = 1'700'000'000'000;
  r.plugin_id = "synth_sensor";
  r.seq = 42;
  r.payload = model::json{{"value", 0.84}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(model::record_from_line(model::record_to_line(r)));
  }
}
BENCHMARK(bm_record_round_trip);

void bm_deflate_sensor_stream(benchmark::State& state) {
  std::string stream = sensor_stream(static_cast<size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(util::deflate_raw(stream));
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * stream.size()));
}
BENCHMARK(bm_deflate_sensor_stream)->Arg(1000)->Arg(10000);

void bm_storage_append(benchmark::State& state) {
  std::filesystem::path dir =
      std::filesystem::temp_directory_path() / ("probekit-bench-" + util::uuid4());
  {
    storage::StorageConfig c;
    c.data_dir = dir;
    c.chunk_max_uncompressed_bytes = 256ull * 1024 * 1024;
    c.chunk_max_age_ms = 1ll << 40;
    storage::StorageManager sm(c, util::uuid4(), "bench-device");
    sched::SimulatedClock clock(0);
    model::json payload{{"value", 0.84}};
    for (auto _ : state) {
      benchmark::DoNotOptimize(sm.append("synth_sensor", payload, clock));
      clock.advance(1);
    }
    sm.seal_chunk();
  }
  std::filesystem::remove_all(dir);
}
BENCHMARK(bm_storage_append);

void bm_seal_chunk(benchmark::State& state) {
  std::filesystem::path dir =
      std::filesystem::temp_directory_path() / ("probekit-bench-" + util::uuid4());
  {
    storage::StorageConfig c;
    c.data_dir = dir;
    c.chunk_max_uncompressed_bytes = 256ull * 1024 * 1024;
    c.chunk_max_age_ms = 1ll << 40;
    storage::StorageManager sm(c, util::uuid4(), "bench-device");
    sched::SimulatedClock clock(0);
    model::json payload{{"value", 0.84}};
    for (auto _ : state) {
      state.PauseTiming();
      for (int i = 0; i < state.range(0); i++) {
        sm.append("synth_sensor", payload, clock);
        clock.advance(1);
      }
      state.ResumeTiming();
      benchmark::DoNotOptimize(sm.seal_chunk());
    }
  }
  std::filesystem::remove_all(dir);
}
BENCHMARK(bm_seal_chunk)->Arg(1000);

void bm_sign_and_verify(benchmark::State& state) {
  pack::SigningKey key = pack::SigningKey::generate();
  std::string message(4096, 'x');
  for (auto _ : state) {
    auto sig = key.sign(message);
    benchmark::DoNotOptimize(key.verify(message, sig));
  }
}
BENCHMARK(bm_sign_and_verify);

void bm_energy_simulate(benchmark::State& state) {
  energy::EnergyParams p = energy::default_params();
  energy::Scenario s = *energy::builtin_scenario("a2", p);
  for (auto _ : state) {
    benchmark::DoNotOptimize(energy::simulate(s, 600'000, p));
  }
}
BENCHMARK(bm_energy_simulate);

}  // namespace

BENCHMARK_MAIN();
