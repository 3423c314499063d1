#pragma once

// End-to-end experiment runner behind `chartbench reproduce`.

#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include "chartbench/config.hpp"
#include "chartbench/readout.hpp"
#include "chartbench/synth.hpp"

namespace chartbench {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  exit_ok = 0,
  exit_config_error = 2,
  exit_numerical_failure = 3,
  exit_disconnected_graph = 4,
};

/// Maps an exception to the CLI exit-code contract.
int exit_code_for(const std::exception& e);

Dataset make_dataset(const RunConfig& config);
ScanParams make_scan_params(const RunConfig& config);

struct StageResult {
  std::string name;
  int code = exit_ok;
  std::string error;
  std::vector<std::string> artifacts;  // file names relative to the output directory
  double wall_ms = 0;

  bool ok() const { return code == exit_ok; }
};

struct ReproduceReport {
  std::vector<StageResult> stages;
  std::filesystem::path out_dir;

  /// Exit code of the first failed stage, 0 if all succeeded.
  int exit_code() const;
};

/// Runs dataset generation, the dimension scan, reconstruction grids, readout
/// spectra, mode-pair charts and the rank sweep, writing every artifact and
/// manifest.json into config.out_dir. A failed stage is recorded and later
/// stages that do not depend on it still run.
ReproduceReport cmd_reproduce(const RunConfig& config);

}  // namespace chartbench
