#pragma once

#include "spinhydro/field.hpp"
#include "spinhydro/state.hpp"

namespace spinhydro {

/// Closed-form free evolution of a GaussianPacket (U = 0, unbounded space).
/// Per axis, with tau = t / (2 m w^2) and centre c + k t / m:
///   psi = (2 pi w^2)^(-1/4) (1 + i tau)^(-1/2)
///         exp(-(x - c - k t/m)^2 / (4 w^2 (1 + i tau)) + i k (x - c) - i k^2 t / (2m))
class FreeGaussianSolution {
 public:
  FreeGaussianSolution(const GaussianPacket& packet, Real mass, int dims);

  Complex psi(const Vec3& x, Real t) const;
  /// Continuous (unwrapped) phase S.
  Real phase(const Vec3& x, Real t) const;
  Vec3 drift(const Vec3& x, Real t) const;
  Vec3 osmotic(const Vec3& x, Real t) const;
  Real quantum_potential(const Vec3& x, Real t) const;
  Vec3 centroid(Real t) const;
  /// Standard deviation of |psi|^2 along each axis.
  Vec3 width(Real t) const;

  ComplexField sample(const Grid& grid, Real t) const;

 private:
  GaussianPacket packet_;
  Real mass_;
  int dims_;
};

}  // namespace spinhydro
