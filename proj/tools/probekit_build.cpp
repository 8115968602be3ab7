// Researcher-side package builder: list plugins, generate signing keys,
// build signed experiment packages, verify them.

#include <chrono>
#include <iostream>

#include "CLI11.hpp"
#include "probekit/pack/package.hpp"
#include "probekit/plugin/registry.hpp"

using namespace probekit;

int main(int argc, char** argv) {
  CLI::App app{"probekit experiment package builder"};
  app.require_subcommand(1);

  app.add_subcommand("list-plugins", "Show available collector plugins");

  auto* keygen = app.add_subcommand("keygen", "Generate an author signing key pair");
  std::string key_dir;
  keygen->add_option("--out", key_dir, "Directory for key.pub / key.sec")->required();

  auto* build = app.add_subcommand("build", "Build and sign an experiment package");
  std::string config_path, build_key_dir, out_path;
  build->add_option("--config", config_path, "Experiment config JSON")->required();
  build->add_option("--key", build_key_dir, "Signing key directory")->required();
  build->add_option("--out", out_path, "Output package path")->required();

  auto* verify = app.add_subcommand("verify", "Verify a package signature");
  std::string pkg_path, pub_path;
  verify->add_option("package", pkg_path, "Package file")->required();
  verify->add_option("--key", pub_path, "Expected author public key file (optional)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("list-plugins")) {
      std::cout << pack::render_plugin_table(plugins::Registry::describe_all());
    } else if (app.got_subcommand("keygen")) {
      pack::SigningKey key = pack::SigningKey::generate();
      key.save(key_dir);
      std::cout << "fingerprint " << key.fingerprint() << "\n";
    } else if (app.got_subcommand("build")) {
      pack::BuildConfig config = pack::BuildConfig::from_file(config_path);
      pack::SigningKey key = pack::SigningKey::load(build_key_dir);
      int64_t now = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::system_clock::now().time_since_epoch())
                        .count();
      model::ExperimentManifest m =
          pack::build_package(config, plugins::Registry::describe_all(), key, out_path, now);
      std::cout << "built " << out_path << "\n"
                << "experiment_id " << m.experiment_id << "\n"
                << "version " << m.version << "\n";
      std::cout << "capabilities";
      for (model::Capability c : m.capabilities) std::cout << " " << model::capability_name(c);
      std::cout << "\n";
    } else if (app.got_subcommand("verify")) {
      std::optional<pack::SigningKey> expected;
      if (!pub_path.empty()) expected = pack::SigningKey::load_public(pub_path);
      pack::VerifyResult r = pack::verify_package_file(pkg_path, expected);
      std::cout << (r.ok ? "OK" : "FAIL") << " " << r.reason << "\n";
      if (r.manifest) {
        std::cout << "experiment_id " << r.manifest->experiment_id << "\n"
                  << "author " << r.manifest->author_name << "\n"
                  << "fingerprint " << r.manifest->author_key_fingerprint << "\n";
      }
      return r.ok ? 0 : 1;
    }
  } catch (const pack::BuildError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
