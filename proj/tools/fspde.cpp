#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "fspde/error.hpp"
#include "fspde/harness/config.hpp"
#include "fspde/harness/run.hpp"

// Exit codes: 0 every criterion passed, 1 a criterion failed (or the run
// aborted on a module error), 2 usage or configuration error.
int main(int argc, char** argv) {
  using namespace fspde::harness;

  CLI::App app{"Fractional SPDE toolkit: reproducible experiments"};
  app.set_version_flag("--version", toolkit_version());
  app.require_subcommand(1);

  std::string config_file, out_dir;
  std::size_t threads = 0;
  std::uint64_t seed = 0;
  for (const auto& name : kind_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", config_file, "JSON experiment configuration")->required();
    sub->add_option("--out", out_dir, "output directory")->required();
    sub->add_option("--threads", threads, "worker threads (overrides the config)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "master seed (overrides the config)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string kind = app.get_subcommands().front()->get_name();
  ExperimentConfig config;
  try {
    config = load_config(config_file);
    if (to_string(config.kind) != kind) {
      std::cerr << "error: config describes '" << to_string(config.kind)
                << "' but the command is '" << kind << "'\n";
      return 2;
    }
    const auto* sub = app.get_subcommands().front();
    if (sub->count("--threads")) config.threads = threads;
    if (sub->count("--seed")) config.seed = seed;
  } catch (const fspde::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    const RunManifest m = run_experiment(config, out_dir);
    for (const auto& c : m.criteria) {
      std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    }
    std::cout << "manifest: " << out_dir << "/manifest.json (config " << m.config_hash << ", "
              << m.wall_time << " s)\n";
    return m.pass() ? 0 : 1;
  } catch (const fspde::Error& e) {
    std::cerr << "error [" << fspde::to_string(e.kind()) << "]: " << e.what() << '\n';
    return 1;
  }
}
