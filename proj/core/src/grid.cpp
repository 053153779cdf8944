#include "spinhydro/grid.hpp"

#include <bit>
#include <string>

#include "spinhydro/error.hpp"

namespace spinhydro {

Grid::Grid(int dims, int n, Real extent) : dims_(dims), n_(n), extent_(extent) {
  if (dims != 1 && dims != 2) {
    throw PreconditionError("grid dims must be 1 or 2, got " + std::to_string(dims));
  }
  if (n < 16 || !std::has_single_bit(static_cast<unsigned>(n))) {
    throw PreconditionError("grid n must be a power of two >= 16, got " + std::to_string(n));
  }
  if (!(extent > 0) || !std::isfinite(extent)) {
    throw PreconditionError("grid extent must be positive and finite");
  }
  spacing_ = extent_ / static_cast<Real>(n_);
  size_ = dims_ == 2 ? static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_) : static_cast<std::size_t>(n_);
  wavenumbers_.resize(static_cast<std::size_t>(n_));
  for (int i = 0; i < n_; ++i) {
    const int m = i < n_ / 2 ? i : i - n_;
    wavenumbers_[static_cast<std::size_t>(i)] = 2 * kPi * static_cast<Real>(m) / extent_;
  }
}

Real Grid::cell_volume() const { return dims_ == 2 ? spacing_ * spacing_ : spacing_; }

Vec3 Grid::position(std::size_t flat) const {
  const auto [i0, i1] = indices(flat);
  Vec3 p{coordinate(i0), 0, 0};
  if (dims_ == 2) {
    p.y = coordinate(i1);
  }
  return p;
}

Grid make_grid(int dims, int n, Real extent) { return Grid(dims, n, extent); }

}  // namespace spinhydro
