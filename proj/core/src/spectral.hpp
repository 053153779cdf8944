#pragma once

#include <span>
#include <vector>

#include "spinhydro/grid.hpp"
#include "spinhydro/types.hpp"

namespace spinhydro::detail {

// In-place extended-precision FFT over all grid axes. The inverse includes
// the 1/N normalization. Plans are cached process-wide; execution is
// thread-safe.
void fft_forward(const Grid& grid, std::span<Complex> data);
void fft_inverse(const Grid& grid, std::span<Complex> data);

// Forward transform held in binary128. Derivatives are taken from it and
// rounded back to Real only at the end, so transform roundoff (which scales
// with the largest sample) stays far below the precision of small samples.
class QuadSpectrum {
 public:
  QuadSpectrum(const Grid& grid, std::span<const Complex> f);
  ~QuadSpectrum();
  QuadSpectrum(const QuadSpectrum&) = delete;
  QuadSpectrum& operator=(const QuadSpectrum&) = delete;

  // First derivative along `axis`, Nyquist bin zeroed.
  std::vector<Complex> derivative(int axis) const;
  // -(kx^2 + ky^2) multiplier, Nyquist kept.
  std::vector<Complex> laplacian() const;

 private:
  struct Impl;
  Impl* impl_;
};

// Finite-difference stencils with periodic wrap.
std::vector<Complex> fd2_axis_derivative(const Grid& grid, std::span<const Complex> f, int axis);
std::vector<Complex> fd2_laplacian(const Grid& grid, std::span<const Complex> f);

}  // namespace spinhydro::detail
