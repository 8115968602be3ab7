// Log viewer: preview, merge, CSV export and blob reassembly over chunk
// files found under one or more source roots.

#include <iostream>

#include "CLI11.hpp"
#include "probekit/view/viewer.hpp"

using namespace probekit;

int main(int argc, char** argv) {
  CLI::App app{"probekit log viewer"};
  app.require_subcommand(1);

  view::Selector sel;
  std::string device, chunk;
  std::vector<std::string> roots;
  std::string out_dir;
  size_t limit = 20;

  auto add_common = [&](CLI::App* cmd, bool needs_out) {
    cmd->add_option("--experiment", sel.experiment_id)->required();
    cmd->add_option("--device", device);
    cmd->add_option("--chunk", chunk);
    cmd->add_option("--root", roots, "Source root (repeatable)")->required();
    cmd->add_flag("--skip-corrupt", sel.skip_corrupt, "Skip corrupt chunks instead of aborting");
    if (needs_out) cmd->add_option("--out", out_dir)->required();
    return cmd;
  };

  auto* preview = add_common(app.add_subcommand("preview", "Print the first records"), false);
  preview->add_option("--limit", limit);
  add_common(app.add_subcommand("merge", "Print all records in merge order"), false);
  add_common(app.add_subcommand("csv", "Export one CSV per plugin"), true);
  add_common(app.add_subcommand("blobs", "Extract and merge binary blobs"), true);

  CLI11_PARSE(app, argc, argv);

  for (const std::string& r : roots) sel.roots.emplace_back(r);
  if (!device.empty()) sel.device_id = device;
  if (!chunk.empty()) sel.chunk_id = chunk;
  sel.scope = !chunk.empty()    ? view::Scope::chunk
              : !device.empty() ? view::Scope::device
                                : view::Scope::experiment;

  try {
    if (app.got_subcommand("preview")) {
      std::cout << view::preview(sel, limit);
    } else if (app.got_subcommand("merge")) {
      view::MergeResult merged = view::merge(sel);
      for (const view::MergedRecord& m : merged.records) {
        std::cout << m.device_id << " " << model::record_to_line(m.record) << "\n";
      }
      std::cerr << merged.records.size() << " records from " << merged.chunks_read
                << " chunks\n";
    } else if (app.got_subcommand("csv")) {
      for (const std::string& f : view::export_csv(sel, out_dir)) std::cout << f << "\n";
    } else if (app.got_subcommand("blobs")) {
      view::BlobResult r = view::extract_blobs(sel, out_dir);
      for (const std::string& f : r.written) std::cout << f << "\n";
      for (const std::string& f : r.failed) std::cerr << "CRC mismatch: " << f << "\n";
      return r.failed.empty() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
