#pragma once

#include <string>
#include <vector>

#include "config.hpp"
#include "json.hpp"

namespace approx::cli {

inline constexpr const char* kToolVersion = "approx 0.1.0";

/// Exit code 0: all asserted properties hold; 2: at least one violated
/// (failures carry machine-readable criterion names); config errors throw
/// ConfigError before any run starts.
struct ExperimentOutcome {
  int exit_code = 0;
  std::vector<std::string> failures;
  nlohmann::json summary;  // key measured quantities, also written to disk
};

ExperimentOutcome run_bistable_sweep(const ExperimentConfig& cfg);
ExperimentOutcome run_drift_demo(const ExperimentConfig& cfg);
ExperimentOutcome run_correction_demo(const ExperimentConfig& cfg);
ExperimentOutcome run_tiling_study(const ExperimentConfig& cfg);
ExperimentOutcome run_lp_bound(const ExperimentConfig& cfg);
ExperimentOutcome run_fit_and_verify(const ExperimentConfig& cfg);

/// Validates, dispatches, times stages, and writes outputs + manifest.json
/// (and failures.json when assertions fail) under cfg.out_dir.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg);

}  // namespace approx::cli
