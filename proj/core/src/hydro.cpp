#include "spinhydro/hydro.hpp"

#include <algorithm>
#include <deque>

#include "spinhydro/derivatives.hpp"

namespace spinhydro {
namespace {

constexpr Real kSpinTolerance = 1e-12L;

Vec3 real_part(const std::array<Complex, 3>& a) { return {a[0].real(), a[1].real(), a[2].real()}; }
Vec3 imag_part(const std::array<Complex, 3>& a) { return {a[0].imag(), a[1].imag(), a[2].imag()}; }

// psi* grad psi, the common numerator of both velocities.
std::vector<std::array<Complex, 3>> weighted_gradient(const ComplexField& psi, Backend backend) {
  const auto grad = gradient(psi, backend);
  std::vector<std::array<Complex, 3>> w(psi.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Complex c = std::conj(psi[i]);
    w[i] = {c * grad[i][0], c * grad[i][1], c * grad[i][2]};
  }
  return w;
}

void require_nonzero(const ScalarField& rho) {
  if (!(*std::max_element(rho.begin(), rho.end()) > 0)) {
    throw PreconditionError("wavefunction vanishes identically");
  }
}

VectorField velocity_from(const std::vector<std::array<Complex, 3>>& w, const ScalarField& rho, Real mass,
                          bool imaginary) {
  std::vector<Vec3> v(w.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = (imaginary ? imag_part(w[i]) : real_part(w[i])) / (mass * rho[i]);
  }
  return VectorField(rho.grid(), std::move(v));
}

// Q_kin with v_S possibly unfilled: only R v_S enters the divergence, and
// R v_S = Re(psi* grad psi) / (m R) stays bounded where rho is tiny.
ScalarField q_kinetic(const VectorField& v_S, const ScalarField& rho, const Mask& mask, Real mass, Backend backend) {
  const Grid& grid = rho.grid();
  std::vector<Vec3> flux(rho.size());
  std::vector<Real> R(rho.size());
  for (std::size_t i = 0; i < flux.size(); ++i) {
    R[i] = std::sqrt(rho[i]);
    flux[i] = R[i] > 0 ? v_S[i] * R[i] : Vec3{};
  }
  const auto div_flux = divergence(VectorField(grid, std::move(flux)), backend);
  std::vector<Real> q(rho.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (mask[i]) {
      continue;
    }
    const Real v2 = norm2(v_S[i]);
    const Real div_v = (div_flux[i] - mass * R[i] * v2) / R[i];
    q[i] = -mass / 2 * v2 - div_v / 2;
  }
  return fill_nodal(ScalarField(grid, std::move(q)), mask);
}

ScalarField q_amplitude(const ScalarField& rho, const Mask& mask, Real mass, Backend backend) {
  const Grid& grid = rho.grid();
  std::vector<Real> R(rho.size());
  std::transform(rho.begin(), rho.end(), R.begin(), [](Real r) { return std::sqrt(r); });
  const auto lap = laplacian(ScalarField(grid, R), backend);
  std::vector<Real> q(rho.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!mask[i]) {
      q[i] = -lap[i] / (2 * mass * R[i]);
    }
  }
  return fill_nodal(ScalarField(grid, std::move(q)), mask);
}

void require_mass(Real mass) {
  if (!(mass > 0)) {
    throw PreconditionError("mass must be positive");
  }
}

}  // namespace

SpinVector::SpinVector(const Vec3& s) : s_(s) {
  const Real violation = spin_norm_violation(s);
  if (!(violation <= kSpinTolerance)) {
    throw PreconditionError("spin vector not unit norm (|s^2 - 1| = " + std::to_string(static_cast<double>(violation)) +
                            ")");
  }
}

SpinVector SpinVector::normalized(const Vec3& s) {
  const Real len = norm(s);
  if (!(len > 0) || !std::isfinite(len)) {
    throw PreconditionError("spin vector must be finite and non-zero");
  }
  return SpinVector(s / len);
}

Real spin_norm_violation(const Vec3& s) { return std::fabs(norm2(s) - 1); }

ScalarField density(const ComplexField& psi) {
  std::vector<Real> rho(psi.size());
  std::transform(psi.begin(), psi.end(), rho.begin(), [](const Complex& c) { return std::norm(c); });
  return ScalarField(psi.grid(), std::move(rho));
}

Mask nodal_mask(const ScalarField& rho, Real node_epsilon) {
  const Real threshold = node_epsilon * *std::max_element(rho.begin(), rho.end());
  std::vector<std::uint8_t> mask(rho.size());
  std::transform(rho.begin(), rho.end(), mask.begin(), [&](Real r) { return r < threshold ? 1 : 0; });
  return Mask(rho.grid(), std::move(mask));
}

template <typename T>
Field<T> fill_nodal(const Field<T>& f, const Mask& mask) {
  const Grid& grid = f.grid();
  std::vector<T> out(f.begin(), f.end());
  std::vector<std::uint8_t> done(mask.size());
  std::deque<std::size_t> queue;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    done[i] = mask[i] ? 0 : 1;
    if (done[i]) {
      queue.push_back(i);
    }
  }
  if (queue.size() == mask.size() || queue.empty()) {
    return Field<T>(grid, std::move(out));
  }
  // Multi-source BFS in index order; ties resolve to the first-reached source.
  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop_front();
    const auto [i0, i1] = grid.indices(i);
    std::array<std::size_t, 4> nbrs{};
    int count = 0;
    nbrs[count++] = grid.index(grid.wrap(i0 - 1), i1);
    nbrs[count++] = grid.index(grid.wrap(i0 + 1), i1);
    if (grid.dims() == 2) {
      nbrs[count++] = grid.index(i0, grid.wrap(i1 - 1));
      nbrs[count++] = grid.index(i0, grid.wrap(i1 + 1));
    }
    for (int k = 0; k < count; ++k) {
      const std::size_t j = nbrs[static_cast<std::size_t>(k)];
      if (!done[j]) {
        done[j] = 1;
        out[j] = out[i];
        queue.push_back(j);
      }
    }
  }
  return Field<T>(grid, std::move(out));
}

template Field<Real> fill_nodal(const Field<Real>&, const Mask&);
template Field<Vec3> fill_nodal(const Field<Vec3>&, const Mask&);

VectorField drift_velocity(const ComplexField& psi, Real mass, const HydroOptions& options) {
  require_mass(mass);
  const auto rho = density(psi);
  require_nonzero(rho);
  const auto mask = nodal_mask(rho, options.node_epsilon);
  return fill_nodal(velocity_from(weighted_gradient(psi, options.backend), rho, mass, true), mask);
}

VectorField osmotic_velocity(const ComplexField& psi, Real mass, const HydroOptions& options) {
  require_mass(mass);
  const auto rho = density(psi);
  require_nonzero(rho);
  const auto mask = nodal_mask(rho, options.node_epsilon);
  return fill_nodal(velocity_from(weighted_gradient(psi, options.backend), rho, mass, false), mask);
}

ScalarField quantum_potential_amplitude(const ComplexField& psi, Real mass, const HydroOptions& options) {
  require_mass(mass);
  const auto rho = density(psi);
  require_nonzero(rho);
  return q_amplitude(rho, nodal_mask(rho, options.node_epsilon), mass, options.backend);
}

ScalarField quantum_potential_kinetic(const VectorField& v_S, const ScalarField& rho, Real mass,
                                      const HydroOptions& options) {
  require_mass(mass);
  if (!(v_S.grid() == rho.grid())) {
    throw PreconditionError("v_S and rho live on different grids");
  }
  require_nonzero(rho);
  return q_kinetic(v_S, rho, nodal_mask(rho, options.node_epsilon), mass, options.backend);
}

CurrentFields current(const ScalarField& rho, const VectorField& v_B, const VectorField& v_S, const SpinVector& s) {
  if (!(rho.grid() == v_B.grid()) || !(rho.grid() == v_S.grid())) {
    throw PreconditionError("current inputs live on different grids");
  }
  std::vector<Vec3> J(rho.size());
  std::vector<Vec3> v(rho.size());
  for (std::size_t i = 0; i < J.size(); ++i) {
    v[i] = v_B[i] + cross(v_S[i], s.value());
    J[i] = v[i] * rho[i];
  }
  return {VectorField(rho.grid(), std::move(J)), VectorField(rho.grid(), std::move(v))};
}

VectorField probability_current(const ComplexField& psi, Real mass, const SpinVector* s, Backend backend) {
  require_mass(mass);
  const auto w = weighted_gradient(psi, backend);
  std::vector<Vec3> J(w.size());
  for (std::size_t i = 0; i < J.size(); ++i) {
    J[i] = imag_part(w[i]) / mass;
    if (s != nullptr) {
      J[i] += cross(real_part(w[i]) / mass, s->value());
    }
  }
  return VectorField(psi.grid(), std::move(J));
}

HydroFields extract_hydro(const ComplexField& psi, Real mass, const SpinVector& s, const HydroOptions& options) {
  require_mass(mass);
  auto rho = density(psi);
  require_nonzero(rho);
  auto mask = nodal_mask(rho, options.node_epsilon);
  const auto w = weighted_gradient(psi, options.backend);
  auto v_B = fill_nodal(velocity_from(w, rho, mass, true), mask);
  const auto v_S_raw = velocity_from(w, rho, mass, false);
  auto Q_kin = q_kinetic(v_S_raw, rho, mask, mass, options.backend);
  auto v_S = fill_nodal(v_S_raw, mask);
  auto Q_amp = q_amplitude(rho, mask, mass, options.backend);
  auto currents = current(rho, v_B, v_S, s);
  return HydroFields{std::move(rho),          std::move(v_B),   std::move(v_S),
                     std::move(Q_amp),        std::move(Q_kin), std::move(currents.J),
                     std::move(currents.v_total), std::move(mask)};
}

}  // namespace spinhydro
