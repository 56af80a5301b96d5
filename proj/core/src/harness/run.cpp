#include "fspde/harness/run.hpp"

#include <chrono>
#include <fstream>
#include <json.hpp>

#include "fspde/error.hpp"

#ifndef FSPDE_VERSION
#define FSPDE_VERSION "unknown"
#endif

namespace fspde::harness {

std::string toolkit_version() { return FSPDE_VERSION; }

bool RunManifest::pass() const {
  for (const auto& c : criteria) {
    if (!c.pass) return false;
  }
  return true;
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = kind;
  j["config_hash"] = config_hash;
  j["version"] = version;
  j["seed"] = seed;
  j["threads"] = threads;
  j["wall_time_seconds"] = wall_time;
  j["pass"] = pass();
  auto& list = j["criteria"] = nlohmann::ordered_json::array();
  for (const auto& c : criteria) {
    list.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  }
  j["outputs"] = outputs;
  return j.dump(2) + "\n";
}

namespace {

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open " + file.string() + " for writing");
  out << text;
  out.close();
  if (!out) fail(ErrorKind::Io, "failed writing " + file.string());
}

}  // namespace

RunManifest run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create output directory " + out_dir.string() + ": " + ec.message());

  RunManifest m;
  m.kind = to_string(config.kind);
  m.config_hash = config.hash();
  m.version = toolkit_version();
  m.seed = config.seed;
  m.threads = config.threads;

  const auto start = std::chrono::steady_clock::now();
  ExperimentOutput result;
  try {
    result = execute(config);
  } catch (const Error& e) {
    fail(e.kind(), m.kind + ": " + e.what());
  }
  m.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  m.criteria = std::move(result.criteria);

  for (const auto& [name, table] : result.tables) {
    write_csv(out_dir / name, table);
    m.outputs.push_back(name);
  }
  for (const auto& [name, text] : result.texts) {
    write_text(out_dir / name, text);
    m.outputs.push_back(name);
  }
  write_text(out_dir / "manifest.json", m.to_json());
  return m;
}

}  // namespace fspde::harness
