#include "spinhydro/potential.hpp"

#include <algorithm>

namespace spinhydro {

const char* to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::free:
      return "free";
    case PotentialKind::harmonic:
      return "harmonic";
    case PotentialKind::barrier:
      return "barrier";
    case PotentialKind::tabulated:
      return "tabulated";
  }
  return "unknown";
}

Potential::Potential(PotentialKind kind, ScalarField values,
                     std::variant<std::monostate, HarmonicParams, BarrierParams> params)
    : kind_(kind), values_(std::move(values)), params_(params) {
  for (Real u : values_) {
    if (!std::isfinite(u)) {
      throw PreconditionError("potential must be finite everywhere");
    }
    max_abs_ = std::max(max_abs_, std::fabs(u));
  }
}

Potential Potential::free(const Grid& grid) { return Potential(PotentialKind::free, ScalarField(grid), {}); }

Potential Potential::harmonic(const Grid& grid, Real mass, std::array<Real, 2> omega) {
  if (!(mass > 0)) {
    throw PreconditionError("harmonic potential needs mass > 0");
  }
  auto values = ScalarField::sample(grid, [&](const Vec3& p) {
    Real u = omega[0] * omega[0] * p.x * p.x;
    if (grid.dims() == 2) {
      u += omega[1] * omega[1] * p.y * p.y;
    }
    return mass * u / 2;
  });
  return Potential(PotentialKind::harmonic, std::move(values), HarmonicParams{mass, omega});
}

Potential Potential::barrier(const Grid& grid, Real height, Real center, Real width) {
  if (!(width > 0)) {
    throw PreconditionError("barrier width must be positive");
  }
  auto values = ScalarField::sample(grid, [&](const Vec3& p) {
    const Real d = p.x - center;
    return height * std::exp(-d * d / (2 * width * width));
  });
  return Potential(PotentialKind::barrier, std::move(values), BarrierParams{height, center, width});
}

Potential Potential::tabulated(ScalarField values) {
  return Potential(PotentialKind::tabulated, std::move(values), {});
}

}  // namespace spinhydro
