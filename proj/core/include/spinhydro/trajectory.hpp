#pragma once

#include <string>
#include <vector>

#include "spinhydro/hydro.hpp"
#include "spinhydro/propagator.hpp"

namespace spinhydro {

/// Which part of v = v_B + v_S x s moves the particle.
enum class VelocityMode { total, drift, internal };

const char* to_string(VelocityMode mode);
VelocityMode parse_velocity_mode(const std::string& text);

/// Per-frame v_B, v_S x s and nodal masks, built once and read-only after.
class FieldCache {
 public:
  /// Extracts hydro fields for every frame; `workers` threads split the frames.
  FieldCache(const FrameSequence& frames, const SpinVector& s, const HydroOptions& options = {}, int workers = 1);
  /// From already-extracted fields (one entry per frame).
  FieldCache(const FrameSequence& frames, const SpinVector& s, std::span<const HydroFields> hydro);

  const Grid& grid() const { return drift_.front().grid(); }
  Real dt_field() const { return dt_field_; }
  std::size_t size() const { return drift_.size(); }
  Real end_time() const { return dt_field_ * static_cast<Real>(size() - 1); }
  const SpinVector& spin() const { return spin_; }

  const VectorField& drift(std::size_t j) const { return drift_[j]; }
  const VectorField& internal(std::size_t j) const { return internal_[j]; }
  const Mask& mask(std::size_t j) const { return mask_[j]; }

 private:
  Real dt_field_;
  SpinVector spin_;
  std::vector<VectorField> drift_;
  std::vector<VectorField> internal_;
  std::vector<Mask> mask_;
};

struct VelocitySample {
  Vec3 drift;     ///< v_B
  Vec3 internal;  ///< v_S x s
  bool nodal{false};

  Vec3 select(VelocityMode mode) const;
};

/// Linear (1D) / bilinear (2D) in space, linear in time. Grid components of
/// x are taken modulo the extent; other components are ignored. `nodal` is
/// set when any stencil sample is masked.
VelocitySample sample_velocity(const FieldCache& cache, const Vec3& x, Real t);

Vec3 interpolate_velocity(const FieldCache& cache, const Vec3& x, Real t, VelocityMode mode);

/// Initial split of a total position into external and internal parts.
struct SplitSpec {
  Vec3 x0_total;
  Vec3 x_ext0;
  Vec3 x_int0;

  /// Throws unless x_ext0 + x_int0 == x0_total exactly.
  static SplitSpec make(const Vec3& x_ext0, const Vec3& x_int0);
  static SplitSpec external_only(const Vec3& x0) { return make(x0, Vec3{}); }
};

struct NodalEvent {
  Real time;
  Vec3 position;
};

struct Trajectory {
  std::vector<Real> times;
  std::vector<Vec3> x_total;
  std::vector<Vec3> x_ext;
  std::vector<Vec3> x_int;
  std::vector<Vec3> v_total;       ///< velocity of the selected mode
  std::vector<Vec3> v_B_along;     ///< sampled v_B
  std::vector<Vec3> v_perp_along;  ///< sampled v_S x s
  std::vector<std::uint8_t> nodal_flag;
  std::vector<NodalEvent> nodal_events;
};

struct AdvectOptions {
  Real dt_traj{0.01L};
  /// Integration span; <= 0 means up to the last frame.
  Real duration{0};
  VelocityMode mode{VelocityMode::total};
  /// Steps a trajectory may spend in the nodal region before NodalTrapError.
  int nodal_hold_steps{3};
  /// Keep every k-th step (the endpoint is always kept).
  int record_stride{1};
};

/// RK4 of dx/dt = v(x, t). The same stage velocities feed x_ext (v_B part)
/// and x_int (v_S x s part), so x_total - x_ext - x_int stays constant.
Trajectory advect(const FieldCache& cache, const SplitSpec& split, const AdvectOptions& options);

struct SplitReport {
  Real total_difference{0};     ///< max_t |x_total_a - x_total_b|
  Real external_difference{0};  ///< max_t |x_ext_a - x_ext_b|
  Real offset_error{0};         ///< max_t |(x_ext_a - x_ext_b) - (x_ext0_a - x_ext0_b)|
  Real initial_offset{0};       ///< |x_ext0_a - x_ext0_b|
};

SplitReport split_ambiguity_check(const SplitSpec& a, const SplitSpec& b, const FieldCache& cache,
                                  const AdvectOptions& options);

}  // namespace spinhydro
