#pragma once

#include <string>
#include <utility>
#include <vector>

#include "fspde/harness/config.hpp"
#include "fspde/harness/csv.hpp"

namespace fspde::harness {

struct CriterionResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Everything one experiment produces; files are written by the caller.
struct ExperimentOutput {
  std::vector<CriterionResult> criteria;
  std::vector<std::pair<std::string, CsvTable>> tables;  // file name, table
  std::vector<std::pair<std::string, std::string>> texts; // file name, contents
};

ExperimentOutput run_fbm_stats(const ExperimentConfig& config);
ExperimentOutput run_stieltjes_oracle(const ExperimentConfig& config);
ExperimentOutput run_mollify_rate(const ExperimentConfig& config);
ExperimentOutput run_mild_solve(const ExperimentConfig& config);
ExperimentOutput run_frozen_mixing(const ExperimentConfig& config);
ExperimentOutput run_averaging_study(const ExperimentConfig& config);
ExperimentOutput run_validate(const ExperimentConfig& config);

ExperimentOutput execute(const ExperimentConfig& config);

/// Var u(t) for du = -lambda u dt + dB^H (u_0 = 0):
///   H(2H-1)/lambda int_0^t z^{2H-2} (e^{-lambda z} - e^{-lambda(2t-z)}) dz.
double additive_fbm_variance(double hurst, double lambda, double t);

}  // namespace fspde::harness
