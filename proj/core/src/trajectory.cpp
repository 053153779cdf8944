#include "spinhydro/trajectory.hpp"

#include <cmath>
#include <optional>

#include "spinhydro/parallel.hpp"

namespace spinhydro {
namespace {

VectorField internal_field(const VectorField& v_S, const SpinVector& s) {
  std::vector<Vec3> out(v_S.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = cross(v_S[i], s.value());
  }
  return VectorField(v_S.grid(), std::move(out));
}

// Periodic cell index and fraction of a coordinate.
std::pair<int, Real> locate(const Grid& grid, Real x) {
  Real u = (x - grid.lower()) / grid.spacing();
  const Real n = static_cast<Real>(grid.n());
  u = std::fmod(u, n);
  if (u < 0) {
    u += n;
  }
  Real cell = std::floor(u);
  Real frac = u - cell;
  if (cell >= n) {
    cell -= n;
  }
  return {static_cast<int>(cell), frac};
}

}  // namespace

const char* to_string(VelocityMode mode) {
  switch (mode) {
    case VelocityMode::total:
      return "total";
    case VelocityMode::drift:
      return "drift";
    case VelocityMode::internal:
      return "internal";
  }
  return "?";
}

VelocityMode parse_velocity_mode(const std::string& text) {
  if (text == "total") return VelocityMode::total;
  if (text == "drift") return VelocityMode::drift;
  if (text == "internal") return VelocityMode::internal;
  throw PreconditionError("unknown velocity mode '" + text + "' (expected total, drift or internal)");
}

FieldCache::FieldCache(const FrameSequence& frames, const SpinVector& s, const HydroOptions& options, int workers)
    : dt_field_(frames.dt_field()), spin_(s) {
  std::vector<std::optional<HydroFields>> hydro(frames.size());
  parallel_for(frames.size(), workers,
               [&](std::size_t j) { hydro[j].emplace(extract_hydro(frames.frame(j), frames.mass(), s, options)); });
  for (auto& h : hydro) {
    internal_.push_back(internal_field(h->v_S, s));
    drift_.push_back(std::move(h->v_B));
    mask_.push_back(std::move(h->nodal_mask));
  }
}

FieldCache::FieldCache(const FrameSequence& frames, const SpinVector& s, std::span<const HydroFields> hydro)
    : dt_field_(frames.dt_field()), spin_(s) {
  if (hydro.size() != frames.size() || hydro.empty()) {
    throw PreconditionError("need one set of hydro fields per frame");
  }
  for (const auto& h : hydro) {
    drift_.push_back(h.v_B);
    internal_.push_back(internal_field(h.v_S, s));
    mask_.push_back(h.nodal_mask);
  }
}

Vec3 VelocitySample::select(VelocityMode mode) const {
  switch (mode) {
    case VelocityMode::drift:
      return drift;
    case VelocityMode::internal:
      return internal;
    case VelocityMode::total:
      break;
  }
  return drift + internal;
}

VelocitySample sample_velocity(const FieldCache& cache, const Vec3& x, Real t) {
  const Real end = cache.end_time();
  const Real slack = 1e-12L * std::max(Real{1}, end);
  if (t < -slack || t > end + slack) {
    throw PreconditionError("velocity query outside the frame time range");
  }
  std::size_t j = 0;
  Real tau = 0;
  if (cache.size() > 1) {
    const Real u = std::clamp(t / cache.dt_field(), Real{0}, static_cast<Real>(cache.size() - 1));
    j = std::min(static_cast<std::size_t>(std::floor(u)), cache.size() - 2);
    tau = u - static_cast<Real>(j);
  }
  const Grid& grid = cache.grid();
  const auto [c0, f0] = locate(grid, x[0]);
  std::array<std::size_t, 4> idx{};
  std::array<Real, 4> wgt{};
  int count = 0;
  if (grid.dims() == 1) {
    idx = {grid.index(c0), grid.index(grid.wrap(c0 + 1)), 0, 0};
    wgt = {1 - f0, f0, 0, 0};
    count = 2;
  } else {
    const auto [c1, f1] = locate(grid, x[1]);
    const int a0 = grid.wrap(c0 + 1);
    const int a1 = grid.wrap(c1 + 1);
    idx = {grid.index(c0, c1), grid.index(a0, c1), grid.index(c0, a1), grid.index(a0, a1)};
    wgt = {(1 - f0) * (1 - f1), f0 * (1 - f1), (1 - f0) * f1, f0 * f1};
    count = 4;
  }
  VelocitySample out;
  auto accumulate = [&](std::size_t frame, Real weight) {
    if (weight == 0) {
      return;
    }
    const auto& d = cache.drift(frame);
    const auto& in = cache.internal(frame);
    const auto& m = cache.mask(frame);
    for (int k = 0; k < count; ++k) {
      const auto uk = static_cast<std::size_t>(k);
      if (wgt[uk] == 0) {
        continue;
      }
      out.drift += d[idx[uk]] * (weight * wgt[uk]);
      out.internal += in[idx[uk]] * (weight * wgt[uk]);
      out.nodal = out.nodal || m[idx[uk]] != 0;
    }
  };
  accumulate(j, 1 - tau);
  if (cache.size() > 1) {
    accumulate(j + 1, tau);
  }
  return out;
}

Vec3 interpolate_velocity(const FieldCache& cache, const Vec3& x, Real t, VelocityMode mode) {
  return sample_velocity(cache, x, t).select(mode);
}

SplitSpec SplitSpec::make(const Vec3& x_ext0, const Vec3& x_int0) { return SplitSpec{x_ext0 + x_int0, x_ext0, x_int0}; }

Trajectory advect(const FieldCache& cache, const SplitSpec& split, const AdvectOptions& options) {
  if (!(split.x_ext0 + split.x_int0 == split.x0_total)) {
    throw PreconditionError("split components do not sum to the total position");
  }
  const Real dt = options.dt_traj;
  if (!(dt > 0) || dt > cache.dt_field() * (1 + 1e-12L)) {
    throw PreconditionError("dt_traj must satisfy 0 < dt_traj <= dt_field");
  }
  const Real duration = options.duration > 0 ? options.duration : cache.end_time();
  if (duration > cache.end_time() * (1 + 1e-12L)) {
    throw PreconditionError("trajectory duration exceeds the frame range");
  }
  const auto steps = static_cast<long>(std::llround(duration / dt));
  if (std::fabs(static_cast<Real>(steps) * dt - duration) > 1e-9L * dt) {
    throw PreconditionError("trajectory duration must be a multiple of dt_traj");
  }
  const Grid& grid = cache.grid();
  for (int a = 0; a < grid.dims(); ++a) {
    const Real half = grid.extent() / 2;
    if (split.x0_total[a] < -half || split.x0_total[a] >= half) {
      throw PreconditionError("initial position lies outside the grid");
    }
  }
  const int stride = std::max(1, options.record_stride);
  const VelocityMode mode = options.mode;
  const bool move_ext = mode != VelocityMode::internal;
  const bool move_int = mode != VelocityMode::drift;

  Trajectory out;
  Vec3 x = split.x0_total;
  Vec3 xe = split.x_ext0;
  Vec3 xi = split.x_int0;
  std::optional<VelocitySample> last;
  int nodal_run = 0;

  auto sample = [&](const Vec3& at, Real t, bool& nodal) {
    VelocitySample v = sample_velocity(cache, at, t);
    if (v.nodal) {
      nodal = true;
      if (last) {
        return *last;
      }
      return v;
    }
    last = v;
    return v;
  };
  auto record = [&](Real t, const VelocitySample& v, bool nodal) {
    out.times.push_back(t);
    out.x_total.push_back(x);
    out.x_ext.push_back(xe);
    out.x_int.push_back(xi);
    out.v_total.push_back(v.select(mode));
    out.v_B_along.push_back(v.drift);
    out.v_perp_along.push_back(v.internal);
    out.nodal_flag.push_back(nodal ? 1 : 0);
  };

  bool nodal0 = false;
  record(0, sample(x, 0, nodal0), nodal0);
  if (nodal0) {
    out.nodal_events.push_back({0, x});
  }
  for (long k = 0; k < steps; ++k) {
    const Real t = static_cast<Real>(k) * dt;
    const Real th = t + dt / 2;
    const Real t1 = static_cast<Real>(k + 1) * dt;
    bool nodal = false;
    const VelocitySample s1 = sample(x, t, nodal);
    const VelocitySample s2 = sample(x + s1.select(mode) * (dt / 2), th, nodal);
    const VelocitySample s3 = sample(x + s2.select(mode) * (dt / 2), th, nodal);
    const VelocitySample s4 = sample(x + s3.select(mode) * dt, t1, nodal);
    const Vec3 ext = (s1.drift + 2 * s2.drift + 2 * s3.drift + s4.drift) * (dt / 6);
    const Vec3 in = (s1.internal + 2 * s2.internal + 2 * s3.internal + s4.internal) * (dt / 6);
    const Vec3 dx = (s1.select(mode) + 2 * s2.select(mode) + 2 * s3.select(mode) + s4.select(mode)) * (dt / 6);
    x += dx;
    if (move_ext) xe += ext;
    if (move_int) xi += in;

    nodal_run = nodal ? nodal_run + 1 : 0;
    if (nodal) {
      out.nodal_events.push_back({t1, x});
    }
    if (nodal_run > options.nodal_hold_steps) {
      throw NodalTrapError("trajectory held in the nodal region for more than " +
                           std::to_string(options.nodal_hold_steps) + " steps at t=" +
                           std::to_string(static_cast<double>(t1)));
    }
    if ((k + 1) % stride == 0 || k + 1 == steps) {
      bool end_nodal = false;
      const VelocitySample v = sample(x, t1, end_nodal);
      record(t1, v, nodal || end_nodal);
    }
  }
  return out;
}

SplitReport split_ambiguity_check(const SplitSpec& a, const SplitSpec& b, const FieldCache& cache,
                                  const AdvectOptions& options) {
  if (!(a.x0_total == b.x0_total)) {
    throw PreconditionError("splits must share the same total initial position");
  }
  const auto ta = advect(cache, a, options);
  const auto tb = advect(cache, b, options);
  const Vec3 initial = a.x_ext0 - b.x_ext0;
  SplitReport report;
  report.initial_offset = norm(initial);
  for (std::size_t k = 0; k < ta.times.size(); ++k) {
    report.total_difference = std::max(report.total_difference, norm(ta.x_total[k] - tb.x_total[k]));
    const Vec3 offset = ta.x_ext[k] - tb.x_ext[k];
    report.external_difference = std::max(report.external_difference, norm(offset));
    report.offset_error = std::max(report.offset_error, norm(offset - initial));
  }
  return report;
}

}  // namespace spinhydro
