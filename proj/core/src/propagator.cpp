#include "spinhydro/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spectral.hpp"

namespace spinhydro {
namespace {

void require_finite(std::span<const Complex> psi) {
  for (const auto& v : psi) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw PreconditionError("wavefunction contains non-finite samples");
    }
  }
}

void require_step_guard(const Potential& potential, Real dt) {
  if (!(dt > 0)) {
    throw PreconditionError("time step must be positive");
  }
  if (dt * potential.max_abs() >= Real{0.5}) {
    std::ostringstream msg;
    msg << "dt * max|U| = " << static_cast<double>(dt * potential.max_abs()) << " violates the 0.5 phase-wrap guard";
    throw PreconditionError(msg.str());
  }
}

}  // namespace

FrameSequence::FrameSequence(Real mass, Potential potential, Real dt_field, std::vector<ComplexField> frames)
    : mass_(mass), potential_(std::move(potential)), dt_field_(dt_field), frames_(std::move(frames)) {
  if (frames_.empty()) {
    throw PreconditionError("frame sequence needs at least one frame");
  }
  if (!(mass_ > 0) || !(dt_field_ > 0)) {
    throw PreconditionError("frame sequence needs mass > 0 and dt_field > 0");
  }
  for (const auto& f : frames_) {
    if (!(f.grid() == frames_.front().grid())) {
      throw PreconditionError("frames must share one grid");
    }
  }
  if (!(potential_.grid() == frames_.front().grid())) {
    throw PreconditionError("potential grid does not match frames");
  }
}

SplitStepPropagator::SplitStepPropagator(const Potential& potential, Real mass, Real dt)
    : grid_(potential.grid()), dt_(dt), mass_(mass) {
  require_step_guard(potential, dt);
  if (!(mass > 0)) {
    throw PreconditionError("mass must be positive");
  }
  const auto& U = potential.values();
  free_ = std::all_of(U.begin(), U.end(), [](Real u) { return u == 0; });
  half_potential_.resize(grid_.size());
  full_potential_.resize(grid_.size());
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    half_potential_[i] = std::polar(Real{1}, -U[i] * dt / 2);
    full_potential_[i] = std::polar(Real{1}, -U[i] * dt);
  }
  k2_.resize(grid_.size());
  kinetic_.resize(grid_.size());
  for (std::size_t flat = 0; flat < grid_.size(); ++flat) {
    const auto [i0, i1] = grid_.indices(flat);
    Real k2 = grid_.wavenumber(i0) * grid_.wavenumber(i0);
    if (grid_.dims() == 2) {
      k2 += grid_.wavenumber(i1) * grid_.wavenumber(i1);
    }
    k2_[flat] = k2;
    kinetic_[flat] = std::polar(Real{1}, -k2 * dt / (2 * mass));
  }
}

void SplitStepPropagator::advance(std::vector<Complex>& psi, long steps) const {
  if (steps <= 0) {
    return;
  }
  if (free_) {
    // U = 0: the kinetic factors of consecutive steps commute and combine.
    const Real tau = dt_ * static_cast<Real>(steps) / (2 * mass_);
    detail::fft_forward(grid_, psi);
    for (std::size_t i = 0; i < psi.size(); ++i) {
      psi[i] *= steps == 1 ? kinetic_[i] : std::polar(Real{1}, -k2_[i] * tau);
    }
    detail::fft_inverse(grid_, psi);
    return;
  }
  // Adjacent half-potential factors of consecutive steps merge into one.
  for (std::size_t i = 0; i < psi.size(); ++i) {
    psi[i] *= half_potential_[i];
  }
  for (long s = 0; s < steps; ++s) {
    detail::fft_forward(grid_, psi);
    for (std::size_t i = 0; i < psi.size(); ++i) {
      psi[i] *= kinetic_[i];
    }
    detail::fft_inverse(grid_, psi);
    const auto& factor = s + 1 < steps ? full_potential_ : half_potential_;
    for (std::size_t i = 0; i < psi.size(); ++i) {
      psi[i] *= factor[i];
    }
  }
}

ComplexField step(const ComplexField& psi, const Potential& potential, Real mass, Real dt) {
  require_finite(psi.values());
  if (!(psi.grid() == potential.grid())) {
    throw PreconditionError("potential grid does not match wavefunction");
  }
  SplitStepPropagator propagator(potential, mass, dt);
  std::vector<Complex> work(psi.begin(), psi.end());
  propagator.advance(work, 1);
  return ComplexField(psi.grid(), std::move(work));
}

FrameSequence evolve(const ComplexField& psi0, const Potential& potential, Real mass, const EvolveOptions& options) {
  require_finite(psi0.values());
  if (!(options.duration > 0)) {
    throw PreconditionError("evolution duration must be positive");
  }
  if (options.frame_stride < 1) {
    throw PreconditionError("frame_stride must be >= 1");
  }
  if (!(psi0.grid() == potential.grid())) {
    throw PreconditionError("potential grid does not match wavefunction");
  }
  const Real step_count = options.duration / options.dt;
  const long steps = std::lround(static_cast<double>(step_count));
  if (steps < 1 || std::fabs(step_count - static_cast<Real>(steps)) > 1e-6L * step_count) {
    throw PreconditionError("duration must be an integer multiple of dt");
  }
  if (steps % options.frame_stride != 0) {
    throw PreconditionError("duration must be an integer multiple of frame_stride * dt");
  }
  SplitStepPropagator propagator(potential, mass, options.dt);

  std::vector<ComplexField> frames;
  frames.reserve(static_cast<std::size_t>(steps / options.frame_stride + 1));
  frames.push_back(psi0);
  std::vector<Complex> work(psi0.begin(), psi0.end());
  for (long done = 0; done < steps; done += options.frame_stride) {
    propagator.advance(work, options.frame_stride);
    ComplexField frame(psi0.grid(), work);
    if (options.check_support && support_leaks(frame)) {
      std::ostringstream msg;
      msg << "probability density reached the boundary strip at t = "
          << static_cast<double>(static_cast<Real>(done + options.frame_stride) * options.dt);
      throw SupportLeakError(msg.str());
    }
    frames.push_back(std::move(frame));
  }
  return FrameSequence(mass, potential, options.dt * static_cast<Real>(options.frame_stride), std::move(frames));
}

Real energy_expectation(const ComplexField& psi, const Potential& potential, Real mass) {
  const Grid& grid = psi.grid();
  std::vector<Complex> spectrum(psi.begin(), psi.end());
  detail::fft_forward(grid, spectrum);
  Real kinetic = 0;
  Real spectral_norm = 0;
  for (std::size_t flat = 0; flat < spectrum.size(); ++flat) {
    const auto [i0, i1] = grid.indices(flat);
    Real k2 = grid.wavenumber(i0) * grid.wavenumber(i0);
    if (grid.dims() == 2) {
      k2 += grid.wavenumber(i1) * grid.wavenumber(i1);
    }
    const Real weight = std::norm(spectrum[flat]);
    kinetic += weight * k2 / (2 * mass);
    spectral_norm += weight;
  }
  Real pot = 0;
  Real norm = 0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const Real rho = std::norm(psi[i]);
    pot += rho * potential.values()[i];
    norm += rho;
  }
  return kinetic / spectral_norm + pot / norm;
}

bool support_leaks(const ComplexField& psi, Real fraction, int strip) {
  const Grid& grid = psi.grid();
  Real peak = 0;
  for (const auto& v : psi) {
    peak = std::max(peak, std::norm(v));
  }
  const Real limit = fraction * peak;
  const int n = grid.n();
  auto near_edge = [&](int i) { return i < strip || i >= n - strip; };
  for (std::size_t flat = 0; flat < psi.size(); ++flat) {
    const auto [i0, i1] = grid.indices(flat);
    const bool edge = near_edge(i0) || (grid.dims() == 2 && near_edge(i1));
    if (edge && std::norm(psi[flat]) > limit) {
      return true;
    }
  }
  return false;
}

}  // namespace spinhydro
