#include "spinhydro/state.hpp"

#include <sstream>

namespace spinhydro {
namespace {

// Normalized Hermite function phi_n(xi), unit L2 norm in xi.
Real hermite_function(int n, Real xi) {
  Real prev = std::pow(kPi, Real{-0.25}) * std::exp(-xi * xi / 2);
  if (n == 0) {
    return prev;
  }
  Real cur = std::sqrt(Real{2}) * xi * prev;
  for (int k = 1; k < n; ++k) {
    const Real next = std::sqrt(Real{2} / (k + 1)) * xi * cur - std::sqrt(static_cast<Real>(k) / (k + 1)) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

void check_support(const Grid& grid, Real center, Real width, int axis) {
  std::ostringstream where;
  where << " (axis " << axis << ")";
  if (width < 3 * grid.spacing()) {
    throw PreconditionError("state width below 3 grid spacings" + where.str());
  }
  const Real half = grid.extent() / 2;
  if (center - 5 * width < -half || center + 5 * width > half - grid.spacing()) {
    throw PreconditionError("state lies within 5 widths of the periodic boundary" + where.str());
  }
}

Complex gaussian_value(const GaussianPacket& g, const Grid& grid, const Vec3& p) {
  Complex value(1, 0);
  for (int a = 0; a < grid.dims(); ++a) {
    const Real w = g.width[a];
    const Real d = p[a] - g.center[a];
    value *= std::pow(2 * kPi * w * w, Real{-0.25}) * std::exp(Complex(-d * d / (4 * w * w), g.momentum[a] * d));
  }
  return value;
}

Real eigenstate_value(const HarmonicEigenstate& h, const Grid& grid, const Vec3& p) {
  Real value = 1;
  for (int a = 0; a < grid.dims(); ++a) {
    const Real omega = split_step_matched_frequency(h.omega[static_cast<std::size_t>(a)], h.integrator_dt);
    const Real scale = std::sqrt(h.mass * omega);
    value *= std::sqrt(scale) * hermite_function(h.quanta[static_cast<std::size_t>(a)], scale * p[a]);
  }
  return value;
}

void validate(const StateComponent& component, const Grid& grid) {
  if (const auto* g = std::get_if<GaussianPacket>(&component)) {
    for (int a = 0; a < grid.dims(); ++a) {
      check_support(grid, g->center[a], g->width[a], a);
    }
    return;
  }
  const auto& h = std::get<HarmonicEigenstate>(component);
  if (!(h.mass > 0)) {
    throw PreconditionError("harmonic eigenstate needs mass > 0");
  }
  for (int a = 0; a < grid.dims(); ++a) {
    const auto ua = static_cast<std::size_t>(a);
    if (h.quanta[ua] < 0 || !(h.omega[ua] > 0)) {
      throw PreconditionError("harmonic eigenstate needs quanta >= 0 and omega > 0");
    }
    if (h.integrator_dt > 0 && h.omega[ua] * h.integrator_dt >= 2) {
      throw PreconditionError("split-step matching requires omega * dt < 2");
    }
    const Real omega = split_step_matched_frequency(h.omega[ua], h.integrator_dt);
    const Real width = std::sqrt((h.quanta[ua] + Real{0.5}) / (h.mass * omega));
    check_support(grid, 0, width, a);
  }
}

}  // namespace

Real split_step_matched_frequency(Real omega, Real dt) {
  if (dt <= 0) {
    return omega;
  }
  return omega * std::sqrt(1 - omega * omega * dt * dt / 4);
}

Real total_probability(const ComplexField& psi) {
  Real sum = 0;
  for (const auto& v : psi) {
    sum += std::norm(v);
  }
  return sum * psi.grid().cell_volume();
}

ComplexField init_state(const StateSpec& spec, const Grid& grid) {
  if (spec.terms.empty()) {
    throw PreconditionError("initial state needs at least one component");
  }
  std::vector<Complex> values(grid.size(), Complex{});
  for (const auto& term : spec.terms) {
    validate(term.state, grid);
    for (std::size_t i = 0; i < values.size(); ++i) {
      const Vec3 p = grid.position(i);
      const Complex v = std::holds_alternative<GaussianPacket>(term.state)
                            ? gaussian_value(std::get<GaussianPacket>(term.state), grid, p)
                            : Complex(eigenstate_value(std::get<HarmonicEigenstate>(term.state), grid, p), 0);
      values[i] += term.coefficient * v;
    }
  }
  ComplexField raw(grid, std::move(values));
  const Real norm = total_probability(raw);
  if (!(norm > 0) || !std::isfinite(norm)) {
    throw PreconditionError("initial state has zero or non-finite norm");
  }
  const Real scale = 1 / std::sqrt(norm);
  std::vector<Complex> normalized(raw.begin(), raw.end());
  for (auto& v : normalized) {
    v *= scale;
  }
  return ComplexField(grid, std::move(normalized));
}

}  // namespace spinhydro
