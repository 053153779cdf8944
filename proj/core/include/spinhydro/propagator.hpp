#pragma once

#include <span>
#include <vector>

#include "spinhydro/field.hpp"
#include "spinhydro/potential.hpp"

namespace spinhydro {

/// Time-stamped frames psi(t_j), t_j = j * dt_field.
class FrameSequence {
 public:
  FrameSequence(Real mass, Potential potential, Real dt_field, std::vector<ComplexField> frames);

  const Grid& grid() const { return frames_.front().grid(); }
  Real mass() const { return mass_; }
  const Potential& potential() const { return potential_; }
  Real dt_field() const { return dt_field_; }
  std::size_t size() const { return frames_.size(); }
  Real time(std::size_t j) const { return dt_field_ * static_cast<Real>(j); }
  Real end_time() const { return time(frames_.size() - 1); }
  const ComplexField& frame(std::size_t j) const { return frames_[j]; }
  std::span<const ComplexField> frames() const { return frames_; }

 private:
  Real mass_;
  Potential potential_;
  Real dt_field_;
  std::vector<ComplexField> frames_;
};

/// Strang split-step exp(-iU dt/2) exp(-i k^2 dt / 2m) exp(-iU dt/2).
class SplitStepPropagator {
 public:
  SplitStepPropagator(const Potential& potential, Real mass, Real dt);

  /// Advances `psi` in place by `steps` steps.
  void advance(std::vector<Complex>& psi, long steps) const;
  Real dt() const { return dt_; }

 private:
  Grid grid_;
  Real dt_;
  Real mass_;
  bool free_{false};
  std::vector<Real> k2_;
  std::vector<Complex> half_potential_;
  std::vector<Complex> full_potential_;
  std::vector<Complex> kinetic_;
};

struct EvolveOptions {
  Real duration{1};
  Real dt{1e-3};
  int frame_stride{10};
  bool check_support{true};
};

/// One split step. Requires dt > 0, dt * max|U| < 0.5 and finite psi.
ComplexField step(const ComplexField& psi, const Potential& potential, Real mass, Real dt);

/// Frames at t = j * frame_stride * dt up to `duration`, including t = 0.
/// Throws SupportLeakError if any frame leaks into the boundary strip.
FrameSequence evolve(const ComplexField& psi0, const Potential& potential, Real mass, const EvolveOptions& options);

/// <H> = spectral kinetic + potential expectation, per unit probability.
Real energy_expectation(const ComplexField& psi, const Potential& potential, Real mass);

/// True when density within `strip` spacings of the boundary exceeds
/// `fraction` of the maximum density.
bool support_leaks(const ComplexField& psi, Real fraction = 1e-8, int strip = 3);

}  // namespace spinhydro
