#pragma once

#include "spinhydro/hydro.hpp"

namespace spinhydro {

/// Spin constraints and kinetic-energy split, all rho-weighted over off-nodal samples.
struct ConstraintReport {
  Real spin_norm{0};                ///< |s^2 - 1|
  Real osmotic_alignment{0};        ///< RMS(v_S . s) / RMS|v_S|
  Real drift_internal_alignment{0}; ///< RMS(v_B . (v_S x s)) / RMS(|v_B||v_S|)
  Real kinetic_identity{0};         ///< RMS(|v|^2 - v_B^2 - v_S^2)
  Real kinetic_expansion_gap{0};    ///< max | |v|^2 - (v_B^2 + v_S^2 s^2 - (v_S.s)^2 + 2 v_B.(v_S x s)) |
};

ConstraintReport spin_constraint_residuals(const VectorField& v_B, const VectorField& v_S, const SpinVector& s,
                                           const ScalarField& rho, const Mask& mask);

/// Max off-nodal discrepancies of the velocity product identities:
///   v_B . v_S  vs  Im{(grad psi / psi)^2} / (2 m^2)
///   v_B x v_S  vs  Re{ i (grad psi* x grad psi) / (2 m^2 rho) }
/// `vector_product_real_part` is max |Re (grad psi* x grad psi)| / (2 m^2 rho),
/// which vanishes identically.
struct IdentityReport {
  Real scalar_product{0};
  Real vector_product{0};
  Real vector_product_real_part{0};
};

IdentityReport cross_identities(const ComplexField& psi, const VectorField& v_B, const VectorField& v_S, Real mass,
                                const HydroOptions& options = {});

/// Max off-nodal |curl v_B| and |curl v_S|. Curls are taken in R-weighted
/// flux form, curl u = (curl(R u) - m R v_S x u) / R, with R u built directly
/// from psi so it stays smooth where rho is tiny.
struct IrrotationalityReport {
  Real drift{0};
  Real osmotic{0};
};

IrrotationalityReport irrotationality(const ComplexField& psi, Real mass, const HydroOptions& options = {});

/// Max |a - b| over samples off-nodal in `mask`.
Real max_offnodal_difference(const ScalarField& a, const ScalarField& b, const Mask& mask);
Real max_offnodal_difference(const VectorField& a, const VectorField& b, const Mask& mask);

/// sqrt(sum rho f^2 / sum rho) over off-nodal samples.
Real weighted_rms(std::span<const Real> values, const ScalarField& rho, const Mask& mask);

/// Largest change in v_B, v_S, Q_amp, Q_kin, v_total when psi -> scale * psi.
struct InvarianceReport {
  Real drift{0};
  Real osmotic{0};
  Real quantum_potential{0};
  Real total_velocity{0};
  Real max() const;
};

InvarianceReport scaling_invariance(const ComplexField& psi, Complex scale, Real mass, const SpinVector& s,
                                    const HydroOptions& options = {});

}  // namespace spinhydro
