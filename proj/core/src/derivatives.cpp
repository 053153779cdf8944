#include "spinhydro/derivatives.hpp"

#include <algorithm>

#include "spectral.hpp"

namespace spinhydro {
namespace {

std::vector<Complex> to_complex(std::span<const Real> values) {
  std::vector<Complex> out(values.size());
  std::transform(values.begin(), values.end(), out.begin(), [](Real v) { return Complex(v, 0); });
  return out;
}

// Per-axis first derivatives of a complex sample vector; components beyond
// grid dims stay zero.
std::array<std::vector<Complex>, 3> axis_derivatives(const Grid& grid, std::span<const Complex> f, Backend backend) {
  std::array<std::vector<Complex>, 3> out;
  for (auto& component : out) {
    component.assign(f.size(), Complex{});
  }
  if (backend == Backend::fd2) {
    for (int axis = 0; axis < grid.dims(); ++axis) {
      out[static_cast<std::size_t>(axis)] = detail::fd2_axis_derivative(grid, f, axis);
    }
    return out;
  }
  const detail::QuadSpectrum spectrum(grid, f);
  for (int axis = 0; axis < grid.dims(); ++axis) {
    out[static_cast<std::size_t>(axis)] = spectrum.derivative(axis);
  }
  return out;
}

std::vector<Complex> laplacian_of(const Grid& grid, std::span<const Complex> f, Backend backend) {
  if (backend == Backend::fd2) {
    return detail::fd2_laplacian(grid, f);
  }
  return detail::QuadSpectrum(grid, f).laplacian();
}

// Two real components packed as a + i b share one transform; the derivative
// operators are real, so the parts separate again afterwards.
std::vector<Complex> pack(const VectorField& v, int a, int b) {
  std::vector<Complex> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = Complex(v[i][a], b < 0 ? Real{0} : v[i][b]);
  }
  return out;
}

// d[c][a] = d(component c)/d(axis a) for the requested components.
std::array<std::array<std::vector<Real>, 2>, 3> component_derivatives(const VectorField& v, Backend backend) {
  const Grid& grid = v.grid();
  std::array<std::array<std::vector<Real>, 2>, 3> d;
  auto store = [&](const std::array<std::vector<Complex>, 3>& dd, int a, int b) {
    for (int axis = 0; axis < grid.dims(); ++axis) {
      const auto& src = dd[static_cast<std::size_t>(axis)];
      auto& da = d[static_cast<std::size_t>(a)][static_cast<std::size_t>(axis)];
      da.resize(src.size());
      for (std::size_t i = 0; i < src.size(); ++i) {
        da[i] = src[i].real();
      }
      if (b >= 0) {
        auto& db = d[static_cast<std::size_t>(b)][static_cast<std::size_t>(axis)];
        db.resize(src.size());
        for (std::size_t i = 0; i < src.size(); ++i) {
          db[i] = src[i].imag();
        }
      }
    }
  };
  store(axis_derivatives(grid, pack(v, 0, 1), backend), 0, 1);
  store(axis_derivatives(grid, pack(v, 2, -1), backend), 2, -1);
  return d;
}

}  // namespace

const char* to_string(Backend backend) { return backend == Backend::spectral ? "spectral" : "fd2"; }

VectorField gradient(const ScalarField& f, Backend backend) {
  const auto complex_values = to_complex(f.values());
  const auto d = axis_derivatives(f.grid(), complex_values, backend);
  std::vector<Vec3> out(f.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = {d[0][i].real(), d[1][i].real(), d[2][i].real()};
  }
  return VectorField(f.grid(), std::move(out));
}

ScalarField laplacian(const ScalarField& f, Backend backend) {
  const auto lap = laplacian_of(f.grid(), to_complex(f.values()), backend);
  std::vector<Real> out(f.size());
  std::transform(lap.begin(), lap.end(), out.begin(), [](const Complex& c) { return c.real(); });
  return ScalarField(f.grid(), std::move(out));
}

ScalarField divergence(const VectorField& v, Backend backend) {
  const Grid& grid = v.grid();
  std::vector<Real> out(v.size(), Real{0});
  if (backend == Backend::spectral) {
    // One transform of v_x + i v_y; d/dx keeps v_x in the real part, d/dy
    // keeps v_y in the imaginary part.
    const detail::QuadSpectrum spectrum(grid, pack(v, 0, 1));
    for (int axis = 0; axis < grid.dims(); ++axis) {
      const auto d = spectrum.derivative(axis);
      for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] += axis == 0 ? d[i].real() : d[i].imag();
      }
    }
    return ScalarField(grid, std::move(out));
  }
  const auto d = component_derivatives(v, backend);
  for (int axis = 0; axis < grid.dims(); ++axis) {
    const auto& along = d[static_cast<std::size_t>(axis)][static_cast<std::size_t>(axis)];
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] += along[i];
    }
  }
  return ScalarField(grid, std::move(out));
}

VectorField curl(const VectorField& v, Backend backend) {
  const Grid& grid = v.grid();
  const auto d = component_derivatives(v, backend);
  auto at = [&](int c, int a, std::size_t i) -> Real {
    if (a >= grid.dims()) {
      return 0;
    }
    return d[static_cast<std::size_t>(c)][static_cast<std::size_t>(a)][i];
  };
  std::vector<Vec3> out(v.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = {at(2, 1, i) - at(1, 2, i), at(0, 2, i) - at(2, 0, i), at(1, 0, i) - at(0, 1, i)};
  }
  return VectorField(grid, std::move(out));
}

ComplexVectorField gradient(const ComplexField& f, Backend backend) {
  const auto d = axis_derivatives(f.grid(), f.values(), backend);
  std::vector<std::array<Complex, 3>> out(f.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = {d[0][i], d[1][i], d[2][i]};
  }
  return ComplexVectorField(f.grid(), std::move(out));
}

ComplexField laplacian(const ComplexField& f, Backend backend) {
  return ComplexField(f.grid(), laplacian_of(f.grid(), f.values(), backend));
}

}  // namespace spinhydro
