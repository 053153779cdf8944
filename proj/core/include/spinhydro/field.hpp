#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "spinhydro/error.hpp"
#include "spinhydro/grid.hpp"
#include "spinhydro/types.hpp"

namespace spinhydro {

/// Immutable sampled field on a Grid. Operations return new fields.
template <typename T>
class Field {
 public:
  using value_type = T;

  explicit Field(Grid grid) : grid_(std::move(grid)), values_(grid_.size(), T{}) {}

  Field(Grid grid, std::vector<T> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
      throw PreconditionError("field sample count does not match grid size");
    }
  }

  /// Samples fn(position) at every grid point.
  template <typename Fn>
  static Field sample(const Grid& grid, Fn&& fn) {
    std::vector<T> values(grid.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      values[i] = fn(grid.position(i));
    }
    return Field(grid, std::move(values));
  }

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const T> values() const { return values_; }
  const T& operator[](std::size_t i) const { return values_[i]; }

  auto begin() const { return values_.cbegin(); }
  auto end() const { return values_.cend(); }

 private:
  Grid grid_;
  std::vector<T> values_;
};

using ComplexField = Field<Complex>;
using ScalarField = Field<Real>;
using VectorField = Field<Vec3>;
using ComplexVectorField = Field<std::array<Complex, 3>>;
/// 1 where the sample is nodal (excluded), 0 elsewhere.
using Mask = Field<std::uint8_t>;

}  // namespace spinhydro
