#pragma once

#include <cstdint>
#include <vector>

#include "spinhydro/trajectory.hpp"

namespace spinhydro {

/// Smallest ensemble for which the statistical operations are meaningful.
inline constexpr std::size_t kMinEnsembleSize = 100;

/// Draws n positions from rho0 treated as piecewise constant over grid cells
/// [x_i - h/2, x_i + h/2): inverse CDF over cells (2D: axis-1 marginal, then
/// axis-0 conditional), uniform jitter inside the chosen cell. Out-of-grid
/// components are 0. Deterministic in `seed` (mt19937_64).
std::vector<Vec3> sample_initial(const ScalarField& rho0, std::size_t n, std::uint64_t seed);

struct EnsembleOptions {
  std::size_t n{10000};
  std::uint64_t seed{1};
  VelocityMode mode{VelocityMode::total};
  Real dt_traj{0.01L};
  int workers{1};
  /// Record positions every k-th frame time (the last frame is always kept).
  int record_every_frames{1};
  /// Abort when more than this fraction of trajectories nodal-trap.
  Real max_trapped_fraction{0.01L};
};

struct Ensemble {
  std::size_t n{0};
  std::uint64_t seed{0};
  VelocityMode mode{VelocityMode::total};
  int dims{1};
  std::vector<Vec3> initial_positions;
  /// Frame indices at which positions were recorded.
  std::vector<std::size_t> record_frames;
  std::vector<Real> record_times;
  /// In-grid components, layout [record][trajectory][axis], rounded to double.
  std::vector<double> positions;
  std::vector<std::uint8_t> trapped;
  std::size_t trapped_count{0};

  /// In-grid position of trajectory i at record r.
  std::array<double, 2> position(std::size_t r, std::size_t i) const;
};

/// Samples from |psi_0|^2 and advects every trajectory. Work is split by
/// trajectory index; output does not depend on `workers`.
Ensemble run_ensemble(const FrameSequence& frames, const FieldCache& cache, const EnsembleOptions& options);

/// Default bin count: sqrt(n)/2, capped at 64, at least 1.
int default_bins(std::size_t n);

/// Total-variation distance between the binned empirical distribution at
/// record r and rho(., t_r) integrated over the same bins. Bins tile the box
/// where rho >= 1e-6 max(rho); an extra bucket collects everything outside.
/// 2D uses round(sqrt(bins)) bins per axis. Trapped trajectories are excluded.
Real equivariance_metric(const Ensemble& ensemble, const ScalarField& rho, std::size_t record, int bins);

/// TV distance at every recorded time.
std::vector<Real> tv_series(const Ensemble& ensemble, const FrameSequence& frames, int bins);

}  // namespace spinhydro
