#pragma once

#include "spinhydro/derivatives.hpp"
#include "spinhydro/field.hpp"

namespace spinhydro {

/// Relative density below which a sample counts as nodal.
inline constexpr Real kDefaultNodeEpsilon = 1e-12L;

/// Unit 3-vector fixing the internal-motion axis. Sign is a free choice.
class SpinVector {
 public:
  /// Throws PreconditionError unless |s^2 - 1| <= 1e-12.
  explicit SpinVector(const Vec3& s);
  /// Rescales any non-zero vector to unit length.
  static SpinVector normalized(const Vec3& s);

  const Vec3& value() const { return s_; }

 private:
  Vec3 s_;
};

/// |s^2 - 1| for a raw vector.
Real spin_norm_violation(const Vec3& s);

struct HydroOptions {
  Backend backend{Backend::spectral};
  Real node_epsilon{kDefaultNodeEpsilon};
};

/// rho = |psi|^2.
ScalarField density(const ComplexField& psi);

/// 1 where rho < node_epsilon * max(rho).
Mask nodal_mask(const ScalarField& rho, Real node_epsilon);

/// Overwrites masked samples with the value of the nearest unmasked sample
/// (breadth-first over grid neighbours, periodic wrap).
template <typename T>
Field<T> fill_nodal(const Field<T>& f, const Mask& mask);

/// v_B = Im(psi* grad psi) / (m rho). Nodal samples filled.
VectorField drift_velocity(const ComplexField& psi, Real mass, const HydroOptions& options = {});

/// v_S = Re(psi* grad psi) / (m rho) = grad rho / (2 m rho). Nodal samples filled.
VectorField osmotic_velocity(const ComplexField& psi, Real mass, const HydroOptions& options = {});

/// Q = -(1/2m) lap(R) / R with R = |psi|.
ScalarField quantum_potential_amplitude(const ComplexField& psi, Real mass, const HydroOptions& options = {});

/// Q = -(m/2) v_S^2 - (1/2) div v_S.
///
/// v_S grows without bound in the tails and is not periodic, so its
/// divergence is taken in flux form: div v_S = (div(R v_S) - m R v_S^2) / R,
/// using grad R = m R v_S. `rho` supplies the weight R and the nodal mask.
/// Pass v_S unfilled where possible: a filled v_S makes R v_S kink at the
/// mask edge, and the spectral derivative spreads that error inward.
ScalarField quantum_potential_kinetic(const VectorField& v_S, const ScalarField& rho, Real mass,
                                      const HydroOptions& options = {});

struct CurrentFields {
  VectorField J;        ///< rho (v_B + v_S x s)
  VectorField v_total;  ///< v_B + v_S x s
};

/// Pointwise spin-augmented current and total velocity.
CurrentFields current(const ScalarField& rho, const VectorField& v_B, const VectorField& v_S, const SpinVector& s);

/// Current evaluated from psi without dividing by rho:
/// Im(psi* grad psi)/m, plus (Re(psi* grad psi)/m) x s when `s` is given.
VectorField probability_current(const ComplexField& psi, Real mass, const SpinVector* s, Backend backend);

struct HydroFields {
  ScalarField rho;
  VectorField v_B;
  VectorField v_S;
  ScalarField Q_amp;
  ScalarField Q_kin;
  VectorField J;
  VectorField v_total;
  Mask nodal_mask;
};

HydroFields extract_hydro(const ComplexField& psi, Real mass, const SpinVector& s, const HydroOptions& options = {});

}  // namespace spinhydro
