#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace approx::cli {

/// Deterministic CSV: shortest-round-trip doubles, fixed row order, a `#`
/// schema comment line, then the header row.
class CsvWriter {
 public:
  using Cell = std::variant<double, long long, std::string>;

  CsvWriter(std::string schema_note, std::vector<std::string> columns)
      : note_(std::move(schema_note)), columns_(std::move(columns)) {}

  void add_row(std::vector<Cell> cells);
  std::string text() const;
  void write(const std::string& path) const;

 private:
  std::string note_;
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

std::string format_shortest(double v);

/// Minimal self-contained SVG line chart (no external renderer).
struct SvgSeries {
  std::string name;
  std::string color = "#1f77b4";
  std::vector<double> xs;
  std::vector<double> ys;
};
void write_svg_lines(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<SvgSeries>& series);

std::uint64_t fnv1a_64(const std::string& bytes);
std::uint64_t fnv1a_file(const std::string& path);

/// Config snapshot, per-stage timings, and output hashes. Re-running with the
/// same config and seed reproduces the output hashes byte for byte.
class RunManifest {
 public:
  RunManifest(std::string tool_version, std::string config_toml);

  void add_stage(const std::string& name, double milliseconds);
  void add_output(const std::string& path);  // hashes the file now
  void set_outcome(int exit_code, const std::vector<std::string>& failures);

  nlohmann::json to_json() const;
  void save(const std::string& path) const;

 private:
  std::string tool_version_;
  std::string config_toml_;
  std::vector<std::pair<std::string, double>> stages_;
  struct Output {
    std::string path;
    std::uint64_t bytes;
    std::string fnv64_hex;
  };
  std::vector<Output> outputs_;
  int exit_code_ = 0;
  std::vector<std::string> failures_;
};

/// Re-checks the hashes recorded in a manifest. Returns 0 when everything
/// matches, 2 otherwise.
int verify_manifest(const std::string& manifest_path);

/// Simple timer for manifest stages.
class StageTimer {
 public:
  StageTimer();
  double elapsed_ms() const;

 private:
  std::uint64_t start_ns_;
};

}  // namespace approx::cli
