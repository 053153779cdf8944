#pragma once

#include <span>
#include <vector>

#include "spinhydro/hydro.hpp"
#include "spinhydro/propagator.hpp"

namespace spinhydro {

/// rho-weighted RMS of a residual at each interior frame (central difference in t).
struct ResidualSeries {
  std::vector<Real> times;
  std::vector<Real> values;
  Real max() const;
};

struct HamiltonJacobiResidual {
  ResidualSeries series;
  bool anchor_consistent{true};
  Real max_path_inconsistency{0};  ///< worst xy/yx sweep disagreement over frames
};

/// dS/dt + (m/2) v_B^2 + [(m/2) v_S^2 - lap(rho) / (4 m rho)] + U, with S rebuilt
/// per frame under a shared anchor convention.
HamiltonJacobiResidual hj_residual(const FrameSequence& frames, std::span<const HydroFields> hydro,
                                   const HydroOptions& options = {});

/// d rho/dt + div J for a supplied current per frame.
ResidualSeries continuity_residual(const FrameSequence& frames, std::span<const VectorField> currents,
                                   const HydroOptions& options = {});

struct ContinuityComparison {
  ResidualSeries drift_only;  ///< J = rho v_B
  ResidualSeries full;        ///< J = rho (v_B + v_S x s)
  Real max_difference() const;
};

ContinuityComparison continuity_comparison(const FrameSequence& frames, const SpinVector& s,
                                           const HydroOptions& options = {});

}  // namespace spinhydro
