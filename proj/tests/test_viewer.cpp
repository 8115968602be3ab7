#include <algorithm>
#include <fstream>

#include "doctest.h"
#include "probekit/sched/clock.hpp"
#include "probekit/util/fs.hpp"
#include "probekit/view/viewer.hpp"
#include "test_util.hpp"

using namespace probekit;
using testing::TempDir;

namespace {

// Two devices with interleaved timestamps under one root.
void make_corpus(const std::filesystem::path& root, const std::string& exp) {
  storage::StorageConfig c;
  c.data_dir = root;
  {
    storage::StorageManager sm(c, exp, "dev-a");
    sched::SimulatedClock clock(0);
    for (int i = 0; i < 20; i++) {
      sm.append("synth_sensor", model::json{{"value", i * 1.0}}, clock);
      clock.advance(100);
    }
    sm.seal_chunk();
    for (int i = 20; i < 30; i++) {
      sm.append("sys_mem", model::json{{"total_bytes", 100}, {"used_bytes", i}}, clock);
      clock.advance(100);
    }
    sm.seal_chunk();
  }
  {
    storage::StorageManager sm(c, exp, "dev-b");
    sched::SimulatedClock clock(50);  // interleaves between dev-a ticks
    for (int i = 0; i < 15; i++) {
      sm.append("synth_sensor", model::json{{"value", -i * 1.0}}, clock);
      clock.advance(100);
    }
    sm.seal_chunk();
  }
}

view::Selector select_all(const std::filesystem::path& root, const std::string& exp) {
  view::Selector sel;
  sel.scope = view::Scope::experiment;
  sel.experiment_id = exp;
  sel.roots = {root};
  return sel;
}

}  // namespace

TEST_CASE("selector invariants") {
  view::Selector sel;
  sel.experiment_id = "e";
  sel.scope = view::Scope::chunk;
  sel.roots = {"/tmp"};
  CHECK_THROWS_AS(sel.check(), view::ViewError);  // chunk scope needs chunk_id
  sel.scope = view::Scope::device;
  CHECK_THROWS_AS(sel.check(), view::ViewError);  // device scope needs device_id
  sel.device_id = "d";
  CHECK_NOTHROW(sel.check());
}

TEST_CASE("merge is totally ordered, conserves records, matches a sort oracle") {
  TempDir dir;
  std::string exp = "exp-m";
  make_corpus(dir / "root", exp);
  view::MergeResult merged = view::merge(select_all(dir / "root", exp));

  CHECK(merged.chunks_read == 3);
  CHECK(merged.records.size() == 45);  // conservation

  // strict (ts, device, plugin, seq) order — compare against a re-sort
  auto key = [](const view::MergedRecord& m) {
    return std::make_tuple(m.record.ts_ms, m.device_id, m.record.plugin_id, m.record.seq);
  };
  for (size_t i = 1; i < merged.records.size(); i++) {
    CHECK(key(merged.records[i - 1]) < key(merged.records[i]));
  }

  // scope filters
  view::Selector dev = select_all(dir / "root", exp);
  dev.scope = view::Scope::device;
  dev.device_id = "dev-b";
  CHECK(view::merge(dev).records.size() == 15);
}

TEST_CASE("merge result is independent of root discovery order and deduplicates") {
  TempDir dir;
  std::string exp = "exp-d";
  make_corpus(dir / "rootA", exp);
  // same chunks visible under a second root
  std::filesystem::copy(dir / "rootA", dir / "rootB",
                        std::filesystem::copy_options::recursive);

  view::Selector both = select_all(dir / "rootA", exp);
  both.roots = {dir / "rootA", dir / "rootB"};
  view::MergeResult a = view::merge(both);
  CHECK(a.records.size() == 45);  // duplicates collapsed by chunk_id

  both.roots = {dir / "rootB", dir / "rootA"};
  view::MergeResult b = view::merge(both);
  REQUIRE(a.records.size() == b.records.size());
  for (size_t i = 0; i < a.records.size(); i++) {
    CHECK(model::record_to_line(a.records[i].record) ==
          model::record_to_line(b.records[i].record));
  }
}

TEST_CASE("preview prints a prefix of the merge order") {
  TempDir dir;
  std::string exp = "exp-p";
  make_corpus(dir / "root", exp);
  std::string out = view::preview(select_all(dir / "root", exp), 5);
  size_t lines = std::count(out.begin(), out.end(), '\n');
  CHECK(lines == 6);  // header + 5 records

  std::string empty = view::preview(select_all(dir / "root", "no-such-exp"), 5);
  CHECK(std::count(empty.begin(), empty.end(), '\n') == 1);  // header only
}

TEST_CASE("corrupt chunks abort unless skip_corrupt") {
  TempDir dir;
  std::string exp = "exp-c";
  make_corpus(dir / "root", exp);
  // corrupt one chunk in place
  for (const auto& entry :
       std::filesystem::recursive_directory_iterator(dir / "root" / exp / "dev-a")) {
    if (entry.path().extension() == ".zip") {
      std::string bytes = util::read_file(entry.path());
      bytes[bytes.size() / 2] ^= 0x40;
      util::write_file(entry.path(), bytes);
      break;
    }
  }
  view::Selector sel = select_all(dir / "root", exp);
  CHECK_THROWS_AS(view::merge(sel), view::ViewError);
  sel.skip_corrupt = true;
  view::MergeResult merged = view::merge(sel);
  CHECK(merged.corrupt_chunks.size() == 1);
  CHECK(merged.chunks_read == 2);
}

TEST_CASE("csv export: one file per plugin, flattened columns, RFC-4180") {
  TempDir dir;
  std::string exp = "exp-csv";
  storage::StorageConfig c;
  c.data_dir = dir / "root";
  {
    storage::StorageManager sm(c, exp, "dev-a");
    sched::SimulatedClock clock(10);
    sm.append("net_traffic", model::json{{"net", {{"rx", 1}, {"tx", 2}}}}, clock);
    clock.advance(5);
    sm.append("net_traffic", model::json{{"net", {{"rx", 3}, {"tx", 4}}}, {"extra", "a,b\"q\""}},
              clock);
    clock.advance(5);
    sm.append("synth_sensor", model::json{{"value", 0.25}}, clock);
    sm.seal_chunk();
  }
  auto files = view::export_csv(select_all(dir / "root", exp), dir / "out");
  std::sort(files.begin(), files.end());
  CHECK(files == std::vector<std::string>{"net_traffic.csv", "synth_sensor.csv"});

  std::string net = util::read_file(dir / "out" / "net_traffic.csv");
  CHECK(net.rfind("ts_ms,device_id,seq,net.rx,net.tx", 0) == 0);
  CHECK(net.find("\"a,b\"\"q\"\"\"") != std::string::npos);  // quoted field
  CHECK(net.find("10,dev-a,0,1,2") != std::string::npos);

  std::string synth = util::read_file(dir / "out" / "synth_sensor.csv");
  CHECK(synth.rfind("ts_ms,device_id,seq,value", 0) == 0);
  CHECK(synth.find("20,dev-a,2,0.25") != std::string::npos);

  // round-trip: the exported scalar parses back to the same value
  CHECK(model::json::parse("0.25").get<double>() == 0.25);
}

TEST_CASE("blob extraction writes .bin files and a merge-order .stream") {
  TempDir dir;
  std::string exp = "exp-b";
  storage::StorageConfig c;
  c.data_dir = dir / "root";
  std::string blob1 = "first-blob-bytes";
  std::string blob2 = "second-blob-bytes";
  {
    storage::StorageManager sm(c, exp, "dev-a");
    sched::SimulatedClock clock(100);
    sm.append_blob("fs_events", "one.bin", blob1, clock);
    clock.advance(50);
    sm.append_blob("fs_events", "two.bin", blob2, clock);
    sm.seal_chunk();
  }
  view::BlobResult r = view::extract_blobs(select_all(dir / "root", exp), dir / "out");
  CHECK(r.failed.empty());
  REQUIRE(r.written.size() == 3);  // two .bin + one .stream
  CHECK(util::read_file(dir / "out" / "fs_events" / "dev-a" / "100-0.bin") == blob1);
  CHECK(util::read_file(dir / "out" / "fs_events" / "dev-a" / "150-1.bin") == blob2);
  CHECK(util::read_file(dir / "out" / "fs_events" / "dev-a.stream") == blob1 + blob2);
}
