#pragma once

#include <cmath>
#include <complex>
#include <numbers>

namespace spinhydro {

// All field arithmetic and spectral transforms run in extended precision.
// Tail samples (rho ~ 1e-12 of peak) feed second-derivative quotients whose
// double-precision roundoff floor sits above the identity tolerances.
using Real = long double;
using Complex = std::complex<Real>;

inline constexpr Real kPi = std::numbers::pi_v<Real>;

struct Vec3 {
  Real x{0};
  Real y{0};
  Real z{0};

  constexpr Real operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
  constexpr Real& operator[](int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }

  constexpr Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr Vec3& operator-=(const Vec3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  constexpr Vec3& operator*=(Real a) {
    x *= a;
    y *= a;
    z *= a;
    return *this;
  }

  friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
  friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
  friend constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
  friend constexpr Vec3 operator*(Vec3 a, Real s) { return a *= s; }
  friend constexpr Vec3 operator*(Real s, Vec3 a) { return a *= s; }
  friend constexpr Vec3 operator/(Vec3 a, Real s) { return {a.x / s, a.y / s, a.z / s}; }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr Real dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

constexpr Real norm2(const Vec3& a) { return dot(a, a); }
inline Real norm(const Vec3& a) { return std::sqrt(norm2(a)); }

inline Real max_abs_component(const Vec3& a) {
  return std::fmax(std::fabs(a.x), std::fmax(std::fabs(a.y), std::fabs(a.z)));
}

}  // namespace spinhydro
