#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace approx::cli {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& why) : std::runtime_error("config: " + why) {}
};

/// One experiment run, fully determined by this struct plus the seed.
/// Unknown keys are rejected at parse time; load -> save -> load is the
/// identity.
struct ExperimentConfig {
  std::string experiment;  // bistable-sweep | drift-demo | correction-demo |
                           // tiling-study | lp-bound | fit-and-verify
  std::uint64_t seed = 42;
  int n_samples = 10000;
  int jobs = 0;  // 0: APPROX_JOBS or single-threaded
  std::string out_dir = "out";

  // [field]
  std::string field_id = "double-well";
  std::map<std::string, double> field_params;

  // [perturbation]
  std::string g_id = "neg-cos-2x";
  std::vector<double> nu_list = {0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.10,
                                 0.11, 0.12, 0.13, 0.14, 0.15, 0.16, 0.17, 0.18, 0.19, 0.20};

  // [metric]
  double eps = 0.05;
  double delta = 0.02;
  std::vector<double> ps = {1.0, 2.0};
  double t_max = 400.0;

  // [drift]
  double omega_mismatch = 0.01;
  int revolutions = 100;

  // [correction]
  std::vector<double> target_shifts = {0.03, -0.03};

  // [tiling]
  std::vector<int> tile_counts = {8, 16, 32, 64, 128};
  double eps_t = 0.1;
  double axial_eps = 0.4;
  double detune = 0.02;
  int cylinder_tiles = 3;

  // [fit]
  std::vector<int> rbf_centers = {6, 9, 12, 18, 25};
  double rbf_sigma = 0.4;
  double rbf_ridge = 1e-10;

  bool operator==(const ExperimentConfig&) const = default;

  void validate() const;

  /// Reads .toml or .json (by extension).
  static ExperimentConfig load(const std::string& path);
  static ExperimentConfig from_toml_text(const std::string& text);
  static ExperimentConfig from_json_text(const std::string& text);

  std::string to_toml() const;
  std::string to_json_text() const;
  void save(const std::string& path) const;  // canonical TOML
};

/// Perturbation direction registry for config files.
/// Known ids: "neg-cos-2x", "constant-down".
bool known_perturbation(const std::string& id);

}  // namespace approx::cli
