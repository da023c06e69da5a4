#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "config.hpp"
#include "experiments.hpp"
#include "report_io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"approx: construct and verify infinite-horizon approximations of multistable "
               "dynamical systems"};
  app.require_subcommand(1);

  // approx run <experiment> --config <path> [--seed S] [--out DIR] [--jobs N]
  std::string experiment, config_path, out_dir;
  long long seed = -1;
  int jobs = -1;
  CLI::App* run = app.add_subcommand("run", "run an experiment from a config file");
  run->add_option("experiment", experiment,
                  "bistable-sweep | drift-demo | correction-demo | tiling-study | lp-bound | "
                  "fit-and-verify")
      ->required();
  run->add_option("--config", config_path, "TOML (or JSON mirror) config file")->required();
  run->add_option("--seed", seed, "override the config seed");
  run->add_option("--out", out_dir, "override the output directory");
  run->add_option("--jobs", jobs, "worker threads (default: APPROX_JOBS or 1)");

  std::string manifest_path;
  CLI::App* verify = app.add_subcommand("verify", "re-check output hashes from a manifest");
  verify->add_option("manifest", manifest_path, "manifest.json produced by a run")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 3;
  }

  try {
    if (run->parsed()) {
      approx::cli::ExperimentConfig cfg = approx::cli::ExperimentConfig::load(config_path);
      if (cfg.experiment.empty()) cfg.experiment = experiment;
      if (cfg.experiment != experiment)
        throw approx::cli::ConfigError("config names experiment '" + cfg.experiment +
                                       "' but the command line asked for '" + experiment + "'");
      if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
      if (!out_dir.empty()) cfg.out_dir = out_dir;
      if (jobs >= 0) cfg.jobs = jobs;

      const approx::cli::ExperimentOutcome outcome = approx::cli::run_experiment(cfg);
      if (outcome.exit_code == 0) {
        std::printf("%s: all asserted properties hold (outputs in %s)\n",
                    cfg.experiment.c_str(), cfg.out_dir.c_str());
      } else {
        std::fprintf(stderr, "%s: %zu violated criteria (see %s/failures.json)\n",
                     cfg.experiment.c_str(), outcome.failures.size(), cfg.out_dir.c_str());
        for (const auto& f : outcome.failures) std::fprintf(stderr, "  %s\n", f.c_str());
      }
      return outcome.exit_code;
    }
    if (verify->parsed()) return approx::cli::verify_manifest(manifest_path);
  } catch (const approx::cli::ConfigError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 3;
}
