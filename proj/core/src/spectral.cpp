#include "spectral.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace spinhydro::detail {
namespace {

// One cache per FFTW precision. Planning is serialized; execution on
// caller buffers (new-array execute) is thread-safe.
template <typename Plan, typename Cplx, typename Api>
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) {
      Api::destroy(plan);
    }
  }

  Plan get(int dims, int n, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_tuple(dims, n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) {
      return it->second;
    }
    // FFTW_ESTIMATE never touches the scratch contents; FFTW_UNALIGNED lets
    // the plan run on any caller buffer.
    const std::size_t count = dims == 2 ? static_cast<std::size_t>(n) * n : static_cast<std::size_t>(n);
    std::vector<Cplx> scratch(count);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    Plan plan = Api::plan(dims, n, scratch.data(), sign, flags);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, Plan> plans_;
};

struct LongApi {
  static void destroy(fftwl_plan p) { fftwl_destroy_plan(p); }
  static fftwl_plan plan(int dims, int n, fftwl_complex* a, int sign, unsigned flags) {
    return dims == 2 ? fftwl_plan_dft_2d(n, n, a, a, sign, flags) : fftwl_plan_dft_1d(n, a, a, sign, flags);
  }
};

struct QuadApi {
  static void destroy(fftwq_plan p) { fftwq_destroy_plan(p); }
  static fftwq_plan plan(int dims, int n, fftwq_complex* a, int sign, unsigned flags) {
    return dims == 2 ? fftwq_plan_dft_2d(n, n, a, a, sign, flags) : fftwq_plan_dft_1d(n, a, a, sign, flags);
  }
};

using Quad = __float128;
struct QuadComplex {
  Quad re;
  Quad im;
};
static_assert(sizeof(QuadComplex) == sizeof(fftwq_complex));

auto& long_plans() {
  static PlanCache<fftwl_plan, fftwl_complex, LongApi> cache;
  return cache;
}

auto& quad_plans() {
  static PlanCache<fftwq_plan, fftwq_complex, QuadApi> cache;
  return cache;
}

void execute(const Grid& grid, std::span<Complex> data, int sign) {
  fftwl_plan plan = long_plans().get(grid.dims(), grid.n(), sign);
  auto* ptr = reinterpret_cast<fftwl_complex*>(data.data());
  fftwl_execute_dft(plan, ptr, ptr);
}

void execute(const Grid& grid, std::vector<QuadComplex>& data, int sign) {
  fftwq_plan plan = quad_plans().get(grid.dims(), grid.n(), sign);
  auto* ptr = reinterpret_cast<fftwq_complex*>(data.data());
  fftwq_execute_dft(plan, ptr, ptr);
}

}  // namespace

void fft_forward(const Grid& grid, std::span<Complex> data) { execute(grid, data, FFTW_FORWARD); }

void fft_inverse(const Grid& grid, std::span<Complex> data) {
  execute(grid, data, FFTW_BACKWARD);
  const Real scale = Real{1} / static_cast<Real>(grid.size());
  for (auto& v : data) {
    v *= scale;
  }
}

struct QuadSpectrum::Impl {
  Grid grid;
  std::vector<QuadComplex> spectrum;
  std::vector<Quad> k;  // wavenumber per bin index

  std::vector<Complex> finish(std::vector<QuadComplex>& work) const {
    execute(grid, work, FFTW_BACKWARD);
    const Quad scale = Quad(1) / static_cast<Quad>(grid.size());
    std::vector<Complex> out(work.size());
    for (std::size_t i = 0; i < work.size(); ++i) {
      out[i] = Complex(static_cast<Real>(work[i].re * scale), static_cast<Real>(work[i].im * scale));
    }
    return out;
  }
};

QuadSpectrum::QuadSpectrum(const Grid& grid, std::span<const Complex> f) : impl_(new Impl{grid, {}, {}}) {
  impl_->spectrum.resize(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    impl_->spectrum[i] = {static_cast<Quad>(f[i].real()), static_cast<Quad>(f[i].imag())};
  }
  execute(grid, impl_->spectrum, FFTW_FORWARD);
  // pi carries Real precision here; that only rescales every derivative by
  // the same relative 1e-19, unlike transform roundoff.
  const int n = grid.n();
  const Quad base = Quad(2) * static_cast<Quad>(kPi) / static_cast<Quad>(grid.extent());
  impl_->k.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int m = i < n / 2 ? i : i - n;
    impl_->k[static_cast<std::size_t>(i)] = base * static_cast<Quad>(m);
  }
}

QuadSpectrum::~QuadSpectrum() { delete impl_; }

std::vector<Complex> QuadSpectrum::derivative(int axis) const {
  const Grid& grid = impl_->grid;
  std::vector<QuadComplex> work = impl_->spectrum;
  for (std::size_t flat = 0; flat < work.size(); ++flat) {
    const int i = grid.indices(flat)[static_cast<std::size_t>(axis)];
    const Quad k = i == grid.n() / 2 ? Quad(0) : impl_->k[static_cast<std::size_t>(i)];
    // (re + i im) * (i k) = -k im + i k re
    const Quad re = work[flat].re;
    work[flat].re = -k * work[flat].im;
    work[flat].im = k * re;
  }
  return impl_->finish(work);
}

std::vector<Complex> QuadSpectrum::laplacian() const {
  const Grid& grid = impl_->grid;
  std::vector<QuadComplex> work = impl_->spectrum;
  for (std::size_t flat = 0; flat < work.size(); ++flat) {
    const auto idx = grid.indices(flat);
    Quad k2 = impl_->k[static_cast<std::size_t>(idx[0])] * impl_->k[static_cast<std::size_t>(idx[0])];
    if (grid.dims() == 2) {
      k2 += impl_->k[static_cast<std::size_t>(idx[1])] * impl_->k[static_cast<std::size_t>(idx[1])];
    }
    work[flat].re *= -k2;
    work[flat].im *= -k2;
  }
  return impl_->finish(work);
}

std::vector<Complex> fd2_axis_derivative(const Grid& grid, std::span<const Complex> f, int axis) {
  std::vector<Complex> out(f.size());
  const Real inv2h = Real{1} / (2 * grid.spacing());
  for (std::size_t flat = 0; flat < f.size(); ++flat) {
    auto idx = grid.indices(flat);
    auto plus = idx;
    auto minus = idx;
    plus[static_cast<std::size_t>(axis)] = grid.wrap(idx[static_cast<std::size_t>(axis)] + 1);
    minus[static_cast<std::size_t>(axis)] = grid.wrap(idx[static_cast<std::size_t>(axis)] - 1);
    out[flat] = (f[grid.index(plus[0], plus[1])] - f[grid.index(minus[0], minus[1])]) * inv2h;
  }
  return out;
}

std::vector<Complex> fd2_laplacian(const Grid& grid, std::span<const Complex> f) {
  std::vector<Complex> out(f.size());
  const Real invh2 = Real{1} / (grid.spacing() * grid.spacing());
  for (std::size_t flat = 0; flat < f.size(); ++flat) {
    const auto [i0, i1] = grid.indices(flat);
    Complex acc = f[grid.index(grid.wrap(i0 + 1), i1)] + f[grid.index(grid.wrap(i0 - 1), i1)] - Real{2} * f[flat];
    if (grid.dims() == 2) {
      acc += f[grid.index(i0, grid.wrap(i1 + 1))] + f[grid.index(i0, grid.wrap(i1 - 1))] - Real{2} * f[flat];
    }
    out[flat] = acc * invh2;
  }
  return out;
}

}  // namespace spinhydro::detail
