#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace fspde::harness {

enum class ExperimentKind {
  FbmStats,
  StieltjesOracle,
  MollifyRate,
  MildSolve,
  FrozenMixing,
  AveragingStudy,
  Validate,
};

std::string to_string(ExperimentKind kind);
/// Throws Config for unknown names.
ExperimentKind kind_from_string(const std::string& name);
const std::vector<std::string>& kind_names();

inline constexpr double unset = std::numeric_limits<double>::quiet_NaN();

struct FbmStatsParams {
  std::vector<double> hurst{0.6, 0.75, 0.9};
  std::size_t paths = 10000;
  std::size_t grid_points = 32;
  double horizon = 1.0;
};

struct StieltjesParams {
  std::size_t grid_points = 2048;     // polynomial oracle grid on [0, 1]
  std::size_t pairs = 100;            // random fBm pairs for the inequality
  std::size_t pair_grid_points = 513;
  double hurst = 0.7;
  double alpha = unset;               // unset selects the default for hurst
};

struct MollifyParams {
  double hurst = 0.8;
  double alpha = 0.35;
  double holder = 0.7;
  std::size_t samples = 50;
  std::size_t grid_points = 2049;
  std::vector<double> n_values{8, 16, 32, 64, 128};
  std::vector<double> levels{1, 2, 4, 8};
  std::size_t lambda_grid_points = 1025;  // grid of the stopped-path bound
  std::size_t modes = 4;
  double decay = 3.0;
};

struct MildParams {
  double dt = 1.0 / 256.0;
  double horizon = 1.0;
  std::size_t paths = 10000;
  double hurst = 0.7;
  std::size_t modes = 4;        // pure-decay check
  double check_time = 0.125;    // extra variance check time (a grid point)
  std::size_t halving_paths = 32;
};

struct FrozenParams {
  std::size_t modes = 4;
  std::size_t couples = 10000;
  double dt = 2e-3;
  double span = 10.0;           // curve on [0, span / eta]
  double bbar_horizon = 20000.0;
  std::size_t batches = 50;
  double rel_tolerance = 0.01;
};

struct AveragingParams {
  std::size_t modes = 4;
  std::vector<double> eps{0.1, 0.05, 0.02, 0.01};
  std::size_t replicates = 200;
  double dt = 1.0 / 128.0;
  double c_sub = 0.1;
  double horizon = 1.0;
  bool check_independent = true;
};

/// Overrides of the linear test system's declared constants (unset keeps).
struct ValidateParams {
  std::size_t modes = 4;
  std::size_t pairs = 4000;
  double radius = 5.0;
  double c1 = unset, c2 = unset, c3 = unset, c4 = unset;
  double beta1 = unset, beta2 = unset, beta3 = unset;
  bool bounded_fast = false;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Validate;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  FbmStatsParams fbm_stats;
  StieltjesParams stieltjes;
  MollifyParams mollify;
  MildParams mild;
  FrozenParams frozen;
  AveragingParams averaging;
  ValidateParams validate;

  /// Canonical JSON of the effective configuration (defaults filled in,
  /// keys sorted, thread count left out).
  std::string canonical() const;
  /// 16 hex digits of FNV-1a over canonical().
  std::string hash() const;
};

/// Strict JSON parsing: top-level keys "kind", "seed", "threads" and one
/// section named after the kind. Unknown keys, wrong types, missing seed
/// and out-of-range values throw Config with the offending field named.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& file);

}  // namespace fspde::harness
