#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spinhydro/harness/config.hpp"

namespace spinhydro::harness {

struct RunOptions {
  /// Empty: use config.output.directory.
  std::filesystem::path out_dir;
  int workers{1};
  /// `check`: propagation, hydro and identity suites only; nothing written.
  bool identities_only{false};
};

struct DiagnosticResult {
  std::string name;
  bool asserted{true};  ///< false: reported only, never fails the run
  bool passed{true};
  Real value{0};
  Real tolerance{0};
  std::string detail;
};

struct ScenarioReport {
  std::string scenario;
  std::string config_hash;
  std::vector<DiagnosticResult> diagnostics;
  /// Wall-clock seconds per stage. Only ever written to run_meta.json.
  std::map<std::string, double> timings;

  bool passed() const;
  const DiagnosticResult* find(const std::string& name) const;
};

/// Runs one scenario end to end. Outputs (unless identities_only):
///   frames.bin, frames.json        field frames + sidecar
///   config.yaml                    resolved config
///   hydro_NNNN.csv                 hydro fields for output.hydro_frames
///   residuals.json                 per-frame residual series
///   trajectory_NN.csv             one per seed
///   ensemble_<mode>.json (+ _trajectories.csv when dumped)
///   report.json                    diagnostics pass/fail
///   run_meta.json                  timings, worker count, timestamp
/// Module errors propagate after error.json is written.
ScenarioReport run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

/// Machine-readable report, as written to report.json.
std::string report_json(const ScenarioReport& report);

/// error.json with the error category and message.
void write_error_report(const std::filesystem::path& dir, const std::string& category, const std::string& message);

/// Plot-ready files under <out_dir>/plots: per-frame profile .dat files,
/// trajectory traces, TV series, and SVG previews. Returns files written.
std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& out_dir);

}  // namespace spinhydro::harness
