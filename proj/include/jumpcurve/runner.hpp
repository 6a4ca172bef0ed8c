#pragma once

#include <optional>
#include <ostream>
#include <string>

#include "jumpcurve/config.hpp"

namespace jumpcurve {

struct RunOptions {
  std::optional<std::string> out_dir;  // also write report.json + csv files here
  std::string format = "json";         // stdout payload: json | csv
};

// Subcommand bodies. Each writes its primary report to `out` and returns the
// process exit code: 0 ok, 1 usage, 2 bound inapplicable, 3 verification
// refuted. Reports embed the config hash and are byte-identical across runs
// with the same config, including runs with different worker counts.
int run_curvature(const ExperimentConfig& config, const RunOptions& opts, std::ostream& out);
int run_bound(const ExperimentConfig& config, const RunOptions& opts, std::ostream& out);
int run_simulate(const ExperimentConfig& config, const RunOptions& opts, std::ostream& out);
int run_verify(const ExperimentConfig& config, const RunOptions& opts, std::ostream& out);
int run_transport(const ExperimentConfig& config, const RunOptions& opts, std::ostream& out);

}  // namespace jumpcurve
