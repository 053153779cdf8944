#include "spinhydro/identities.hpp"

#include <algorithm>

namespace spinhydro {
namespace {

Real ratio_or_zero(Real num, Real den) { return den > 0 ? num / den : Real{0}; }

struct WeightedSum {
  Real weight{0};
  Real value{0};
  void add(Real rho, Real v) {
    weight += rho;
    value += rho * v;
  }
  Real rms() const { return weight > 0 ? std::sqrt(value / weight) : Real{0}; }
};

void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) {
    throw PreconditionError("fields live on different grids");
  }
}

}  // namespace

ConstraintReport spin_constraint_residuals(const VectorField& v_B, const VectorField& v_S, const SpinVector& s,
                                           const ScalarField& rho, const Mask& mask) {
  require_same_grid(v_B.grid(), rho.grid());
  require_same_grid(v_S.grid(), rho.grid());
  const Vec3& sv = s.value();
  WeightedSum align, vs2, ortho, vbvs, kinetic;
  Real gap = 0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (mask[i]) {
      continue;
    }
    const Real r = rho[i];
    const Vec3 internal = cross(v_S[i], sv);
    const Vec3 v = v_B[i] + internal;
    const Real vb2 = norm2(v_B[i]);
    const Real vs2_i = norm2(v_S[i]);
    const Real along = dot(v_S[i], sv);
    const Real mixed = dot(v_B[i], internal);
    align.add(r, along * along);
    vs2.add(r, vs2_i);
    ortho.add(r, mixed * mixed);
    vbvs.add(r, vb2 * vs2_i);
    const Real k = norm2(v) - vb2 - vs2_i;
    kinetic.add(r, k * k);
    const Real expansion = vb2 + vs2_i * norm2(sv) - along * along + 2 * mixed;
    gap = std::max(gap, std::fabs(norm2(v) - expansion));
  }
  ConstraintReport report;
  report.spin_norm = spin_norm_violation(sv);
  report.osmotic_alignment = ratio_or_zero(align.rms(), vs2.rms());
  report.drift_internal_alignment = ratio_or_zero(ortho.rms(), vbvs.rms());
  report.kinetic_identity = kinetic.rms();
  report.kinetic_expansion_gap = gap;
  return report;
}

IdentityReport cross_identities(const ComplexField& psi, const VectorField& v_B, const VectorField& v_S, Real mass,
                                const HydroOptions& options) {
  require_same_grid(psi.grid(), v_B.grid());
  require_same_grid(psi.grid(), v_S.grid());
  const auto rho = density(psi);
  const auto mask = nodal_mask(rho, options.node_epsilon);
  const auto grad = gradient(psi, options.backend);
  const Real m2 = mass * mass;
  IdentityReport report;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    if (mask[i]) {
      continue;
    }
    const auto& g = grad[i];
    Complex log_sq{};
    for (int a = 0; a < 3; ++a) {
      const Complex l = g[static_cast<std::size_t>(a)] / psi[i];
      log_sq += l * l;
    }
    const Real scalar_rhs = log_sq.imag() / (2 * m2);
    report.scalar_product = std::max(report.scalar_product, std::fabs(dot(v_B[i], v_S[i]) - scalar_rhs));

    // grad psi* x grad psi, component by component.
    const std::array<Complex, 3> gc{std::conj(g[0]), std::conj(g[1]), std::conj(g[2])};
    const std::array<Complex, 3> X{gc[1] * g[2] - gc[2] * g[1], gc[2] * g[0] - gc[0] * g[2],
                                   gc[0] * g[1] - gc[1] * g[0]};
    const Real scale = 2 * m2 * rho[i];
    const Vec3 rhs{-X[0].imag() / scale, -X[1].imag() / scale, -X[2].imag() / scale};
    const Vec3 re{X[0].real() / scale, X[1].real() / scale, X[2].real() / scale};
    report.vector_product = std::max(report.vector_product, max_abs_component(cross(v_B[i], v_S[i]) - rhs));
    report.vector_product_real_part = std::max(report.vector_product_real_part, max_abs_component(re));
  }
  return report;
}

IrrotationalityReport irrotationality(const ComplexField& psi, Real mass, const HydroOptions& options) {
  const Grid& grid = psi.grid();
  const auto rho = density(psi);
  const auto mask = nodal_mask(rho, options.node_epsilon);
  const auto grad = gradient(psi, options.backend);
  std::vector<Vec3> flux_B(psi.size());
  std::vector<Vec3> flux_S(psi.size());
  std::vector<Real> R(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) {
    R[i] = std::sqrt(rho[i]);
    if (!(R[i] > 0)) {
      continue;
    }
    const Complex c = std::conj(psi[i]);
    for (int a = 0; a < 3; ++a) {
      const Complex w = c * grad[i][static_cast<std::size_t>(a)];
      flux_B[i][a] = w.imag() / (mass * R[i]);
      flux_S[i][a] = w.real() / (mass * R[i]);
    }
  }
  const auto curl_B = curl(VectorField(grid, flux_B), options.backend);
  const auto curl_S = curl(VectorField(grid, flux_S), options.backend);
  IrrotationalityReport report;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    if (mask[i]) {
      continue;
    }
    const Vec3 v_B = flux_B[i] / R[i];
    const Vec3 v_S = flux_S[i] / R[i];
    const Vec3 cb = (curl_B[i] - cross(v_S, v_B) * (mass * R[i])) / R[i];
    const Vec3 cs = curl_S[i] / R[i];
    report.drift = std::max(report.drift, norm(cb));
    report.osmotic = std::max(report.osmotic, norm(cs));
  }
  return report;
}

Real max_offnodal_difference(const ScalarField& a, const ScalarField& b, const Mask& mask) {
  Real out = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!mask[i]) {
      out = std::max(out, std::fabs(a[i] - b[i]));
    }
  }
  return out;
}

Real max_offnodal_difference(const VectorField& a, const VectorField& b, const Mask& mask) {
  Real out = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!mask[i]) {
      out = std::max(out, max_abs_component(a[i] - b[i]));
    }
  }
  return out;
}

Real weighted_rms(std::span<const Real> values, const ScalarField& rho, const Mask& mask) {
  WeightedSum sum;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!mask[i]) {
      sum.add(rho[i], values[i] * values[i]);
    }
  }
  return sum.rms();
}

Real InvarianceReport::max() const { return std::max({drift, osmotic, quantum_potential, total_velocity}); }

InvarianceReport scaling_invariance(const ComplexField& psi, Complex scale, Real mass, const SpinVector& s,
                                    const HydroOptions& options) {
  std::vector<Complex> scaled(psi.begin(), psi.end());
  for (auto& c : scaled) {
    c *= scale;
  }
  const auto a = extract_hydro(psi, mass, s, options);
  const auto b = extract_hydro(ComplexField(psi.grid(), std::move(scaled)), mass, s, options);
  std::vector<std::uint8_t> both(psi.size());
  for (std::size_t i = 0; i < both.size(); ++i) {
    both[i] = (a.nodal_mask[i] || b.nodal_mask[i]) ? 1 : 0;
  }
  const Mask mask(psi.grid(), std::move(both));
  InvarianceReport report;
  report.drift = max_offnodal_difference(a.v_B, b.v_B, mask);
  report.osmotic = max_offnodal_difference(a.v_S, b.v_S, mask);
  report.quantum_potential =
      std::max(max_offnodal_difference(a.Q_amp, b.Q_amp, mask), max_offnodal_difference(a.Q_kin, b.Q_kin, mask));
  report.total_velocity = max_offnodal_difference(a.v_total, b.v_total, mask);
  return report;
}

}  // namespace spinhydro
