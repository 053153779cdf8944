#include "spinhydro/analytic.hpp"

namespace spinhydro {

FreeGaussianSolution::FreeGaussianSolution(const GaussianPacket& packet, Real mass, int dims)
    : packet_(packet), mass_(mass), dims_(dims) {
  if (!(mass > 0) || dims < 1 || dims > 2) {
    throw PreconditionError("free Gaussian needs mass > 0 and dims in {1,2}");
  }
}

Complex FreeGaussianSolution::psi(const Vec3& x, Real t) const {
  Complex value(1, 0);
  for (int a = 0; a < dims_; ++a) {
    const Real w = packet_.width[a];
    const Real k = packet_.momentum[a];
    const Real c = packet_.center[a];
    const Complex one_i(1, t / (2 * mass_ * w * w));
    const Real d = x[a] - c - k * t / mass_;
    value *= std::pow(2 * kPi * w * w, Real{-0.25}) / std::sqrt(one_i) *
             std::exp(-d * d / (4 * w * w * one_i) + Complex(0, k * (x[a] - c) - k * k * t / (2 * mass_)));
  }
  return value;
}

Real FreeGaussianSolution::phase(const Vec3& x, Real t) const {
  Real s = 0;
  for (int a = 0; a < dims_; ++a) {
    const Real w = packet_.width[a];
    const Real k = packet_.momentum[a];
    const Real tau = t / (2 * mass_ * w * w);
    const Real d = x[a] - packet_.center[a] - k * t / mass_;
    s += k * (x[a] - packet_.center[a]) - k * k * t / (2 * mass_) + d * d * tau / (4 * w * w * (1 + tau * tau)) -
         std::atan(tau) / 2;
  }
  return s;
}

Vec3 FreeGaussianSolution::drift(const Vec3& x, Real t) const {
  Vec3 v;
  for (int a = 0; a < dims_; ++a) {
    const Real w = packet_.width[a];
    const Real k = packet_.momentum[a];
    const Real d = x[a] - packet_.center[a] - k * t / mass_;
    v[a] = k / mass_ + d * t / (4 * mass_ * mass_ * w * w * w * w + t * t);
  }
  return v;
}

Vec3 FreeGaussianSolution::osmotic(const Vec3& x, Real t) const {
  const Vec3 sd = width(t);
  const Vec3 c = centroid(t);
  Vec3 v;
  for (int a = 0; a < dims_; ++a) {
    v[a] = -(x[a] - c[a]) / (2 * mass_ * sd[a] * sd[a]);
  }
  return v;
}

Real FreeGaussianSolution::quantum_potential(const Vec3& x, Real t) const {
  const Vec3 sd = width(t);
  const Vec3 c = centroid(t);
  Real q = 0;
  for (int a = 0; a < dims_; ++a) {
    const Real s2 = sd[a] * sd[a];
    const Real d = x[a] - c[a];
    q += 1 / (4 * mass_ * s2) - d * d / (8 * mass_ * s2 * s2);
  }
  return q;
}

Vec3 FreeGaussianSolution::centroid(Real t) const {
  Vec3 c;
  for (int a = 0; a < dims_; ++a) {
    c[a] = packet_.center[a] + packet_.momentum[a] * t / mass_;
  }
  return c;
}

Vec3 FreeGaussianSolution::width(Real t) const {
  Vec3 sd;
  for (int a = 0; a < dims_; ++a) {
    const Real w = packet_.width[a];
    const Real tau = t / (2 * mass_ * w * w);
    sd[a] = w * std::sqrt(1 + tau * tau);
  }
  return sd;
}

ComplexField FreeGaussianSolution::sample(const Grid& grid, Real t) const {
  if (grid.dims() != dims_) {
    throw PreconditionError("grid dims do not match the closed-form solution");
  }
  return ComplexField::sample(grid, [&](const Vec3& x) { return psi(x, t); });
}

}  // namespace spinhydro
