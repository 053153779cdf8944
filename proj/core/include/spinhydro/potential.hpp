#pragma once

#include <array>
#include <string>
#include <variant>

#include "spinhydro/field.hpp"

namespace spinhydro {

enum class PotentialKind { free, harmonic, barrier, tabulated };

const char* to_string(PotentialKind kind);

struct HarmonicParams {
  Real mass{1};
  std::array<Real, 2> omega{1, 1};
};

/// Gaussian bump height * exp(-(x - center)^2 / (2 width^2)) along axis 0.
struct BarrierParams {
  Real height{1};
  Real center{0};
  Real width{1};
};

/// Time-independent external potential U realized on the grid.
class Potential {
 public:
  static Potential free(const Grid& grid);
  /// U = m/2 * sum_a omega_a^2 x_a^2.
  static Potential harmonic(const Grid& grid, Real mass, std::array<Real, 2> omega);
  static Potential barrier(const Grid& grid, Real height, Real center, Real width);
  static Potential tabulated(ScalarField values);

  PotentialKind kind() const { return kind_; }
  const ScalarField& values() const { return values_; }
  const Grid& grid() const { return values_.grid(); }
  Real max_abs() const { return max_abs_; }
  const std::variant<std::monostate, HarmonicParams, BarrierParams>& params() const { return params_; }

 private:
  Potential(PotentialKind kind, ScalarField values, std::variant<std::monostate, HarmonicParams, BarrierParams> params);

  PotentialKind kind_;
  ScalarField values_;
  std::variant<std::monostate, HarmonicParams, BarrierParams> params_;
  Real max_abs_{0};
};

}  // namespace spinhydro
