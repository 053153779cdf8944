#pragma once

#include <cstddef>

#include "spinhydro/hydro.hpp"

namespace spinhydro {

/// Phase S rebuilt by integrating m v_B along grid axes from the max-density
/// anchor, where it is pinned to arg(psi). Diagnostic only: v_B itself never
/// depends on S.
struct PhaseReconstruction {
  ScalarField phase;
  Mask defined;  ///< 1 where `phase` holds a value
  std::size_t anchor{0};
  /// Max |S_xy - S_yx| between the two axis orders (2D; 0 in 1D).
  Real path_inconsistency{0};
  bool consistent{true};
};

struct PhaseOptions {
  Real consistency_tolerance{1e-6L};
};

/// When `previous` is given, the anchor value is shifted by a multiple of
/// 2 pi to sit closest to previous->phase at the same sample, keeping S
/// continuous in time.
PhaseReconstruction reconstruct_phase(const ComplexField& psi, const VectorField& v_B, const Mask& mask, Real mass,
                                      const PhaseReconstruction* previous = nullptr, const PhaseOptions& options = {});

}  // namespace spinhydro
