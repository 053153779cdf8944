#include "spinhydro/ensemble.hpp"

#include <algorithm>
#include <random>

#include "spinhydro/parallel.hpp"

namespace spinhydro {
namespace {

Real uniform01(std::mt19937_64& rng) { return static_cast<Real>(rng() >> 11) * 0x1.0p-53L; }

// Index of the first cumulative entry exceeding u.
std::size_t pick(const std::vector<Real>& cdf, Real u) {
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u * cdf.back());
  return std::min(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

std::vector<Real> cumulative(const std::vector<Real>& w) {
  std::vector<Real> cdf(w.size());
  Real sum = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    sum += std::max(Real{0}, w[i]);
    cdf[i] = sum;
  }
  return cdf;
}

// Overlap length of [a0, a1) and [b0, b1).
Real overlap(Real a0, Real a1, Real b0, Real b1) { return std::max(Real{0}, std::min(a1, b1) - std::max(a0, b0)); }

struct Axis {
  Real lo;
  Real hi;
  int bins;
  int bin_of(Real x) const {
    if (x < lo || x >= hi) {
      return -1;
    }
    return std::min(bins - 1, static_cast<int>((x - lo) / (hi - lo) * bins));
  }
};

// Bin index per grid cell overlap weights along one axis.
std::vector<std::vector<std::pair<int, Real>>> cell_overlaps(const Grid& grid, const Axis& axis) {
  const Real h = grid.spacing();
  const Real bw = (axis.hi - axis.lo) / axis.bins;
  std::vector<std::vector<std::pair<int, Real>>> out(static_cast<std::size_t>(grid.n()));
  for (int i = 0; i < grid.n(); ++i) {
    const Real c0 = grid.coordinate(i) - h / 2;
    const Real c1 = c0 + h;
    const int first = std::max(0, static_cast<int>(std::floor((c0 - axis.lo) / bw)));
    const int last = std::min(axis.bins - 1, static_cast<int>(std::floor((c1 - axis.lo) / bw)));
    for (int b = first; b <= last; ++b) {
      const Real ov = overlap(c0, c1, axis.lo + b * bw, axis.lo + (b + 1) * bw);
      if (ov > 0) {
        out[static_cast<std::size_t>(i)].emplace_back(b, ov / h);
      }
    }
  }
  return out;
}

Real wrap_coordinate(const Grid& grid, Real x) {
  const Real L = grid.extent();
  Real u = std::fmod(x - grid.lower(), L);
  if (u < 0) {
    u += L;
  }
  return grid.lower() + u;
}

}  // namespace

std::vector<Vec3> sample_initial(const ScalarField& rho0, std::size_t n, std::uint64_t seed) {
  if (n < kMinEnsembleSize) {
    throw PreconditionError("ensemble size below " + std::to_string(kMinEnsembleSize));
  }
  const Grid& grid = rho0.grid();
  const int N = grid.n();
  const Real h = grid.spacing();
  std::mt19937_64 rng(seed);
  std::vector<Vec3> out(n);
  if (grid.dims() == 1) {
    const auto cdf = cumulative(std::vector<Real>(rho0.begin(), rho0.end()));
    if (!(cdf.back() > 0)) {
      throw PreconditionError("density has no mass");
    }
    for (auto& p : out) {
      const auto i = static_cast<int>(pick(cdf, uniform01(rng)));
      p.x = grid.coordinate(i) + (uniform01(rng) - Real{0.5}) * h;
    }
    return out;
  }
  std::vector<Real> marginal(static_cast<std::size_t>(N), 0);
  std::vector<std::vector<Real>> conditional(static_cast<std::size_t>(N));
  for (int i1 = 0; i1 < N; ++i1) {
    std::vector<Real> row(static_cast<std::size_t>(N));
    for (int i0 = 0; i0 < N; ++i0) {
      row[static_cast<std::size_t>(i0)] = rho0[grid.index(i0, i1)];
    }
    conditional[static_cast<std::size_t>(i1)] = cumulative(row);
    marginal[static_cast<std::size_t>(i1)] = conditional[static_cast<std::size_t>(i1)].back();
  }
  const auto cdf1 = cumulative(marginal);
  if (!(cdf1.back() > 0)) {
    throw PreconditionError("density has no mass");
  }
  for (auto& p : out) {
    const auto i1 = pick(cdf1, uniform01(rng));
    const auto i0 = static_cast<int>(pick(conditional[i1], uniform01(rng)));
    p.y = grid.coordinate(static_cast<int>(i1)) + (uniform01(rng) - Real{0.5}) * h;
    p.x = grid.coordinate(i0) + (uniform01(rng) - Real{0.5}) * h;
  }
  return out;
}

std::array<double, 2> Ensemble::position(std::size_t r, std::size_t i) const {
  const auto d = static_cast<std::size_t>(dims);
  const std::size_t base = (r * n + i) * d;
  return {positions[base], d == 2 ? positions[base + 1] : 0.0};
}

Ensemble run_ensemble(const FrameSequence& frames, const FieldCache& cache, const EnsembleOptions& options) {
  if (frames.size() != cache.size()) {
    throw PreconditionError("field cache does not match the frame sequence");
  }
  Ensemble out;
  out.n = options.n;
  out.seed = options.seed;
  out.mode = options.mode;
  out.dims = frames.grid().dims();
  out.initial_positions = sample_initial(density(frames.frame(0)), options.n, options.seed);

  const int every = std::max(1, options.record_every_frames);
  for (std::size_t j = 0; j < frames.size(); j += static_cast<std::size_t>(every)) {
    out.record_frames.push_back(j);
  }
  if (out.record_frames.back() != frames.size() - 1) {
    out.record_frames.push_back(frames.size() - 1);
  }
  for (auto j : out.record_frames) {
    out.record_times.push_back(frames.time(j));
  }

  const Real steps_per_frame = frames.dt_field() / options.dt_traj;
  const long spf = std::lround(steps_per_frame);
  if (spf < 1 || std::fabs(steps_per_frame - static_cast<Real>(spf)) > 1e-9L) {
    throw PreconditionError("ensemble dt_traj must divide dt_field");
  }
  AdvectOptions advect_options;
  advect_options.dt_traj = options.dt_traj;
  advect_options.mode = options.mode;
  advect_options.record_stride = static_cast<int>(spf);

  const auto d = static_cast<std::size_t>(out.dims);
  const std::size_t records = out.record_frames.size();
  out.positions.assign(records * options.n * d, 0.0);
  out.trapped.assign(options.n, 0);
  parallel_for(options.n, options.workers, [&](std::size_t i) {
    try {
      const auto traj = advect(cache, SplitSpec::external_only(out.initial_positions[i]), advect_options);
      for (std::size_t r = 0; r < records; ++r) {
        const Vec3& x = traj.x_total[out.record_frames[r]];
        for (std::size_t a = 0; a < d; ++a) {
          out.positions[(r * options.n + i) * d + a] = static_cast<double>(x[static_cast<int>(a)]);
        }
      }
    } catch (const NodalTrapError&) {
      out.trapped[i] = 1;
    }
  });
  out.trapped_count = static_cast<std::size_t>(std::count(out.trapped.begin(), out.trapped.end(), 1));
  if (static_cast<Real>(out.trapped_count) > options.max_trapped_fraction * static_cast<Real>(options.n)) {
    throw NodalTrapError(std::to_string(out.trapped_count) + " of " + std::to_string(options.n) +
                         " trajectories trapped in nodal regions");
  }
  return out;
}

int default_bins(std::size_t n) {
  const auto b = static_cast<int>(std::floor(std::sqrt(static_cast<double>(n)) / 2));
  return std::clamp(b, 1, 64);
}

Real equivariance_metric(const Ensemble& ensemble, const ScalarField& rho, std::size_t record, int bins) {
  if (ensemble.n < kMinEnsembleSize) {
    throw PreconditionError("ensemble size below " + std::to_string(kMinEnsembleSize));
  }
  if (bins < 1) {
    throw PreconditionError("bin count must be positive");
  }
  if (record >= ensemble.record_frames.size()) {
    throw PreconditionError("record index out of range");
  }
  const Grid& grid = rho.grid();
  const int dims = grid.dims();
  const int per_axis = dims == 1 ? bins : std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(bins)))));
  const Real h = grid.spacing();
  const Real peak = *std::max_element(rho.begin(), rho.end());
  std::array<Axis, 2> axes{};
  for (int a = 0; a < dims; ++a) {
    int lo = grid.n();
    int hi = -1;
    for (std::size_t i = 0; i < rho.size(); ++i) {
      if (rho[i] >= 1e-6L * peak) {
        const int c = grid.indices(i)[static_cast<std::size_t>(a)];
        lo = std::min(lo, c);
        hi = std::max(hi, c);
      }
    }
    axes[static_cast<std::size_t>(a)] = Axis{grid.coordinate(lo) - h / 2, grid.coordinate(hi) + h / 2, per_axis};
  }
  const std::size_t total_bins = dims == 1 ? static_cast<std::size_t>(per_axis)
                                           : static_cast<std::size_t>(per_axis) * static_cast<std::size_t>(per_axis);

  // Model masses: piecewise-constant rho per cell split by overlap.
  std::vector<Real> model(total_bins + 1, 0);
  const auto ov0 = cell_overlaps(grid, axes[0]);
  const auto ov1 = dims == 2 ? cell_overlaps(grid, axes[1]) : decltype(ov0){};
  Real mass = 0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    mass += rho[i];
    const auto [i0, i1] = grid.indices(i);
    Real placed = 0;
    if (dims == 1) {
      for (const auto& [b, w] : ov0[static_cast<std::size_t>(i0)]) {
        model[static_cast<std::size_t>(b)] += rho[i] * w;
        placed += w;
      }
    } else {
      for (const auto& [b0, w0] : ov0[static_cast<std::size_t>(i0)]) {
        for (const auto& [b1, w1] : ov1[static_cast<std::size_t>(i1)]) {
          model[static_cast<std::size_t>(b0 + per_axis * b1)] += rho[i] * w0 * w1;
          placed += w0 * w1;
        }
      }
    }
    model[total_bins] += rho[i] * (1 - placed);
  }
  for (auto& m : model) {
    m /= mass;
  }

  std::vector<std::size_t> counts(total_bins + 1, 0);
  std::size_t used = 0;
  for (std::size_t i = 0; i < ensemble.n; ++i) {
    if (ensemble.trapped[i]) {
      continue;
    }
    ++used;
    const auto p = ensemble.position(record, i);
    const int b0 = axes[0].bin_of(wrap_coordinate(grid, p[0]));
    int b = b0;
    if (dims == 2 && b0 >= 0) {
      const int b1 = axes[1].bin_of(wrap_coordinate(grid, p[1]));
      b = b1 < 0 ? -1 : b0 + per_axis * b1;
    }
    ++counts[b < 0 ? total_bins : static_cast<std::size_t>(b)];
  }
  if (used == 0) {
    throw PreconditionError("every trajectory is trapped");
  }
  Real tv = 0;
  for (std::size_t b = 0; b <= total_bins; ++b) {
    tv += std::fabs(static_cast<Real>(counts[b]) / static_cast<Real>(used) - model[b]);
  }
  return tv / 2;
}

std::vector<Real> tv_series(const Ensemble& ensemble, const FrameSequence& frames, int bins) {
  std::vector<Real> out;
  out.reserve(ensemble.record_frames.size());
  for (std::size_t r = 0; r < ensemble.record_frames.size(); ++r) {
    out.push_back(equivariance_metric(ensemble, density(frames.frame(ensemble.record_frames[r])), r, bins));
  }
  return out;
}

}  // namespace spinhydro
