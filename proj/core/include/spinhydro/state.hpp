#pragma once

#include <array>
#include <variant>
#include <vector>

#include "spinhydro/field.hpp"

namespace spinhydro {

/// psi = prod_a (2 pi w_a^2)^(-1/4) exp(-(x_a - c_a)^2 / (4 w_a^2) + i k_a (x_a - c_a)).
/// `width` is the standard deviation of |psi|^2 along each axis.
struct GaussianPacket {
  Vec3 center{};
  Vec3 width{1, 1, 1};
  Vec3 momentum{};
};

/// Product of normalized Hermite functions. When `integrator_dt` > 0 the
/// per-axis frequency is replaced by omega * sqrt(1 - omega^2 dt^2 / 4), the
/// frequency whose eigenstates are exactly stationary under a Strang
/// split-step of size dt in the harmonic potential of frequency omega.
struct HarmonicEigenstate {
  std::array<int, 2> quanta{0, 0};
  std::array<Real, 2> omega{1, 1};
  Real mass{1};
  Real integrator_dt{0};
};

using StateComponent = std::variant<GaussianPacket, HarmonicEigenstate>;

struct StateTerm {
  Complex coefficient{1, 0};
  StateComponent state;
};

/// Normalized superposition of packets and eigenstates.
struct StateSpec {
  std::vector<StateTerm> terms;

  static StateSpec single(StateComponent component) { return StateSpec{{StateTerm{Complex(1, 0), component}}}; }
};

/// Frequency whose harmonic eigenstates the split-step map leaves invariant.
Real split_step_matched_frequency(Real omega, Real dt);

/// Samples `spec` and normalizes to unit total probability. Rejects widths
/// below 3 grid spacings and components within 5 widths of the boundary.
ComplexField init_state(const StateSpec& spec, const Grid& grid);

/// Rectangle-rule integral of |psi|^2 (exact trapezoid on a periodic grid).
Real total_probability(const ComplexField& psi);

}  // namespace spinhydro
