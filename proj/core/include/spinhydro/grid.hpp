#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "spinhydro/types.hpp"

namespace spinhydro {

/// Uniform periodic grid on [-extent/2, extent/2) per axis, 1D or 2D.
///
/// Samples are stored axis-0 fastest: index = i0 + n * i1. Grid axes map to
/// the first `dims` components of every 3-vector; the remaining components
/// are out-of-plane.
class Grid {
 public:
  Grid(int dims, int n, Real extent);

  int dims() const { return dims_; }
  int n() const { return n_; }
  Real extent() const { return extent_; }
  Real spacing() const { return spacing_; }
  Real cell_volume() const;
  std::size_t size() const { return size_; }

  /// Physical coordinate of sample i along any axis.
  Real coordinate(int i) const { return -extent_ / 2 + spacing_ * static_cast<Real>(i); }
  Real lower() const { return -extent_ / 2; }

  /// Angular wavenumber of FFT bin i: 2*pi*m/extent, m in [-n/2, n/2).
  Real wavenumber(int i) const { return wavenumbers_[static_cast<std::size_t>(i)]; }
  const std::vector<Real>& wavenumbers() const { return wavenumbers_; }

  std::size_t index(int i0, int i1 = 0) const {
    return static_cast<std::size_t>(i0) + static_cast<std::size_t>(n_) * static_cast<std::size_t>(i1);
  }
  std::array<int, 2> indices(std::size_t flat) const {
    return {static_cast<int>(flat % static_cast<std::size_t>(n_)),
            dims_ == 2 ? static_cast<int>(flat / static_cast<std::size_t>(n_)) : 0};
  }
  /// Position of a flat sample as a 3-vector (out-of-grid components zero).
  Vec3 position(std::size_t flat) const;

  int wrap(int i) const { return ((i % n_) + n_) % n_; }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.dims_ == b.dims_ && a.n_ == b.n_ && a.extent_ == b.extent_;
  }

 private:
  int dims_;
  int n_;
  Real extent_;
  Real spacing_;
  std::size_t size_;
  std::vector<Real> wavenumbers_;
};

/// Validating factory: dims in {1,2}, n a power of two >= 16, extent > 0.
Grid make_grid(int dims, int n, Real extent);

}  // namespace spinhydro
