#include "spinhydro/phase.hpp"

#include <algorithm>
#include <functional>
#include <optional>

namespace spinhydro {
namespace {

constexpr Real kTwoPi = 2 * kPi;

// Integrates m v along one grid line from `start` in both directions until a
// nodal sample or the grid edge. f[p] is m v at line position p, open[p] is
// true off-nodal. Interior intervals use the 4-point rule
// h/24 (-f[p-1] + 13 f[p] + 13 f[p+1] - f[p+2]); intervals touching the edge
// of the open run fall back to the trapezoid.
std::vector<std::optional<Real>> integrate_line(const std::vector<Real>& f, const std::vector<bool>& open, int start,
                                                Real value, Real h) {
  const int n = static_cast<int>(f.size());
  std::vector<std::optional<Real>> out(f.size());
  auto ok = [&](int p) { return p >= 0 && p < n && open[static_cast<std::size_t>(p)]; };
  auto F = [&](int p) { return f[static_cast<std::size_t>(p)]; };
  // Integral of f over [p, p+1].
  auto interval = [&](int p) {
    if (ok(p - 1) && ok(p + 2)) {
      return h / 24 * (-F(p - 1) + 13 * F(p) + 13 * F(p + 1) - F(p + 2));
    }
    return h / 2 * (F(p) + F(p + 1));
  };
  if (!ok(start)) {
    return out;
  }
  out[static_cast<std::size_t>(start)] = value;
  Real s = value;
  for (int p = start; ok(p + 1); ++p) {
    s += interval(p);
    out[static_cast<std::size_t>(p + 1)] = s;
  }
  s = value;
  for (int p = start; ok(p - 1); --p) {
    s -= interval(p - 1);
    out[static_cast<std::size_t>(p - 1)] = s;
  }
  return out;
}

struct Sweep {
  std::vector<Real> phase;
  std::vector<std::uint8_t> defined;
};

// First along `first_axis` through the anchor, then along the other axis
// from every sample reached.
Sweep sweep(const Grid& grid, const VectorField& v_B, const Mask& mask, Real mass, std::size_t anchor, Real anchor_phase,
            int first_axis) {
  const int n = grid.n();
  const Real h = grid.spacing();
  Sweep out{std::vector<Real>(grid.size(), 0), std::vector<std::uint8_t>(grid.size(), 0)};
  const auto a = grid.indices(anchor);

  auto line = [&](int axis, int fixed, std::function<void(int, std::size_t)> visit) {
    for (int p = 0; p < n; ++p) {
      visit(p, axis == 0 ? grid.index(p, fixed) : grid.index(fixed, p));
    }
  };
  auto run = [&](int axis, int fixed, int start, Real value) {
    std::vector<Real> f(static_cast<std::size_t>(n));
    std::vector<bool> open(static_cast<std::size_t>(n));
    std::vector<std::size_t> flat(static_cast<std::size_t>(n));
    line(axis, fixed, [&](int p, std::size_t i) {
      f[static_cast<std::size_t>(p)] = mass * v_B[i][axis];
      open[static_cast<std::size_t>(p)] = !mask[i];
      flat[static_cast<std::size_t>(p)] = i;
    });
    const auto s = integrate_line(f, open, start, value, h);
    for (int p = 0; p < n; ++p) {
      if (s[static_cast<std::size_t>(p)]) {
        const std::size_t i = flat[static_cast<std::size_t>(p)];
        out.phase[i] = *s[static_cast<std::size_t>(p)];
        out.defined[i] = 1;
      }
    }
  };

  if (grid.dims() == 1) {
    run(0, 0, a[0], anchor_phase);
    return out;
  }
  const int second_axis = 1 - first_axis;
  const int fixed = first_axis == 0 ? a[1] : a[0];
  run(first_axis, fixed, first_axis == 0 ? a[0] : a[1], anchor_phase);
  // Seeds for the cross sweeps.
  std::vector<std::pair<int, Real>> seeds;
  for (int p = 0; p < n; ++p) {
    const std::size_t i = first_axis == 0 ? grid.index(p, fixed) : grid.index(fixed, p);
    if (out.defined[i]) {
      seeds.emplace_back(p, out.phase[i]);
    }
  }
  for (const auto& [p, value] : seeds) {
    run(second_axis, p, fixed, value);
  }
  return out;
}

}  // namespace

PhaseReconstruction reconstruct_phase(const ComplexField& psi, const VectorField& v_B, const Mask& mask, Real mass,
                                      const PhaseReconstruction* previous, const PhaseOptions& options) {
  const Grid& grid = psi.grid();
  if (!(grid == v_B.grid()) || !(grid == mask.grid())) {
    throw PreconditionError("phase reconstruction inputs live on different grids");
  }
  std::size_t anchor = 0;
  Real best = -1;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const Real r = std::norm(psi[i]);
    if (r > best) {
      best = r;
      anchor = i;
    }
  }
  if (mask[anchor]) {
    throw PreconditionError("phase anchor lies in the nodal region");
  }
  Real anchor_phase = std::arg(psi[anchor]);
  if (previous != nullptr && previous->phase.grid() == grid && previous->defined[anchor]) {
    const Real target = previous->phase[anchor];
    anchor_phase += kTwoPi * std::round((target - anchor_phase) / kTwoPi);
  }

  PhaseReconstruction out{ScalarField(grid), Mask(grid), anchor, 0, true};
  const Sweep xy = sweep(grid, v_B, mask, mass, anchor, anchor_phase, 0);
  if (grid.dims() == 1) {
    out.phase = ScalarField(grid, xy.phase);
    out.defined = Mask(grid, xy.defined);
    return out;
  }
  const Sweep yx = sweep(grid, v_B, mask, mass, anchor, anchor_phase, 1);
  std::vector<Real> phase(grid.size(), 0);
  std::vector<std::uint8_t> defined(grid.size(), 0);
  Real worst = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (xy.defined[i] && yx.defined[i]) {
      worst = std::max(worst, std::fabs(xy.phase[i] - yx.phase[i]));
    }
    if (xy.defined[i]) {
      phase[i] = xy.phase[i];
      defined[i] = 1;
    } else if (yx.defined[i]) {
      phase[i] = yx.phase[i];
      defined[i] = 1;
    }
  }
  out.phase = ScalarField(grid, std::move(phase));
  out.defined = Mask(grid, std::move(defined));
  out.path_inconsistency = worst;
  out.consistent = worst <= options.consistency_tolerance;
  return out;
}

}  // namespace spinhydro
