#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spinhydro/derivatives.hpp"
#include "spinhydro/ensemble.hpp"
#include "spinhydro/error.hpp"
#include "spinhydro/potential.hpp"
#include "spinhydro/state.hpp"
#include "spinhydro/trajectory.hpp"

namespace spinhydro::harness {

/// Invalid scenario configuration. `key_path` is dotted ("grid.n"),
/// `line` is 1-based (0 when unknown).
class ConfigError : public FormatError {
 public:
  ConfigError(std::string key_path, int line, const std::string& message);
  const std::string& key_path() const { return key_path_; }
  int line() const { return line_; }

 private:
  std::string key_path_;
  int line_;
};

struct GridConfig {
  int dims{1};
  int n{512};
  Real extent{64};
};

struct PotentialConfig {
  PotentialKind kind{PotentialKind::free};
  std::array<Real, 2> omega{1, 1};     ///< harmonic
  Real height{1}, center{0}, width{1};  ///< barrier
  std::vector<Real> values;             ///< tabulated, axis 0 fastest
};

struct StateTermConfig {
  enum class Kind { gaussian, eigenstate } kind{Kind::gaussian};
  Complex coefficient{1, 0};
  Vec3 center{};
  Vec3 width{1, 1, 1};
  Vec3 momentum{};
  std::array<int, 2> quanta{0, 0};
  /// Eigenstate frequency; defaults to the harmonic potential's omega.
  std::optional<std::array<Real, 2>> omega;
  /// Use the frequency whose eigenstates the split step leaves invariant.
  bool match_integrator{true};
};

struct EvolutionConfig {
  Real duration{1};
  Real dt{1e-3L};
  int frame_stride{10};
};

struct HydroConfig {
  Backend backend{Backend::spectral};
  Real node_epsilon{1e-12L};
};

struct SplitPair {
  SplitSpec a;
  SplitSpec b;
};

struct TrajectoryConfig {
  bool enabled{true};
  Real dt{0.01L};
  VelocityMode mode{VelocityMode::total};
  std::vector<Vec3> seeds;
  std::vector<SplitPair> splits;
  int nodal_hold_steps{3};
};

struct EnsembleConfig {
  bool enabled{false};
  std::size_t n{10000};
  std::uint64_t seed{1};
  int bins{0};  ///< 0: default_bins(n)
  std::vector<VelocityMode> modes{VelocityMode::total};
  Real dt{0.01L};
  int record_every{1};
  bool dump_trajectories{false};
};

/// Enabled state and tolerance of one diagnostic. `enabled` unset means
/// "run when applicable to the scenario".
struct DiagnosticSetting {
  std::optional<bool> enabled;
  Real tolerance{0};
};

struct DiagnosticsConfig {
  std::map<std::string, DiagnosticSetting> settings;
  /// Frames used by the costlier per-frame identity checks (evenly spaced, ends included).
  int sample_frames{11};
  Real invariance_scale{7.3L};
  Real invariance_phase{1.1L};
  /// Time at which the centroid is compared with x0 + k0 t / m; unset means
  /// the final frame for free evolution and "not applicable" otherwise.
  std::optional<Real> centroid_time;

  /// Names and default tolerances of every known diagnostic.
  static const std::vector<std::pair<std::string, Real>>& catalogue();
  const DiagnosticSetting& get(const std::string& name) const;
};

struct OutputConfig {
  std::filesystem::path directory{"out"};
  /// Frame indices to dump as hydro CSV; negative counts from the end.
  std::vector<int> hydro_frames{0, -1};
};

struct ScenarioConfig {
  std::string name{"scenario"};
  std::string description;
  GridConfig grid;
  Real mass{1};
  PotentialConfig potential;
  std::vector<StateTermConfig> state;
  Vec3 spin{0, 0, 1};
  EvolutionConfig evolution;
  HydroConfig hydro;
  TrajectoryConfig trajectories;
  EnsembleConfig ensemble;
  DiagnosticsConfig diagnostics;
  OutputConfig output;
};

/// Parses the YAML scenario format (see README). Unknown keys, wrong types
/// and statically checkable guard violations raise ConfigError.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Resolved config with every default filled in, as YAML.
std::string describe(const ScenarioConfig& config, bool include_output_dir = true);

/// FNV-1a 64 of describe(config) without the output directory.
std::uint64_t config_hash(const ScenarioConfig& config);
std::string hash_hex(std::uint64_t hash);

/// Library objects built from a config.
Grid build_grid(const ScenarioConfig& config);
Potential build_potential(const ScenarioConfig& config, const Grid& grid);
StateSpec build_state(const ScenarioConfig& config);

}  // namespace spinhydro::harness
