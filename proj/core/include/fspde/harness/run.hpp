#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fspde/harness/config.hpp"
#include "fspde/harness/experiments.hpp"

namespace fspde::harness {

std::string toolkit_version();

struct RunManifest {
  std::string kind;
  std::string config_hash;
  std::string version;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  double wall_time = 0.0;  // seconds
  std::vector<CriterionResult> criteria;
  std::vector<std::string> outputs;  // file names relative to the output directory

  bool pass() const;
  std::string to_json() const;
};

/// Runs the experiment, writes its CSV and text files plus manifest.json
/// into `out_dir` (created if needed) and returns the manifest. Module
/// errors are rethrown with the experiment name prepended.
RunManifest run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir);

}  // namespace fspde::harness
