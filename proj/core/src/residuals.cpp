#include "spinhydro/residuals.hpp"

#include <algorithm>

#include "spinhydro/identities.hpp"
#include "spinhydro/phase.hpp"

namespace spinhydro {
namespace {

void require_frames(const FrameSequence& frames) {
  if (frames.size() < 2) {
    throw PreconditionError("residuals need at least 2 frames");
  }
}

}  // namespace

Real ResidualSeries::max() const { return values.empty() ? Real{0} : *std::max_element(values.begin(), values.end()); }

HamiltonJacobiResidual hj_residual(const FrameSequence& frames, std::span<const HydroFields> hydro,
                                   const HydroOptions& options) {
  require_frames(frames);
  if (hydro.size() != frames.size()) {
    throw PreconditionError("need one set of hydro fields per frame");
  }
  const Real m = frames.mass();
  const Real dt = frames.dt_field();
  const auto& U = frames.potential().values();

  HamiltonJacobiResidual out;
  std::vector<PhaseReconstruction> phases;
  phases.reserve(frames.size());
  for (std::size_t j = 0; j < frames.size(); ++j) {
    phases.push_back(reconstruct_phase(frames.frame(j), hydro[j].v_B, hydro[j].nodal_mask, m,
                                       j == 0 ? nullptr : &phases.back()));
    out.anchor_consistent = out.anchor_consistent && phases.back().consistent;
    out.max_path_inconsistency = std::max(out.max_path_inconsistency, phases.back().path_inconsistency);
  }

  for (std::size_t j = 1; j + 1 < frames.size(); ++j) {
    const auto& h = hydro[j];
    const auto lap_rho = laplacian(h.rho, options.backend);
    std::vector<Real> r(h.rho.size(), 0);
    std::vector<std::uint8_t> skip(h.rho.size(), 1);
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (h.nodal_mask[i] || !phases[j - 1].defined[i] || !phases[j + 1].defined[i]) {
        continue;
      }
      skip[i] = 0;
      const Real dSdt = (phases[j + 1].phase[i] - phases[j - 1].phase[i]) / (2 * dt);
      const Real bracket = m / 2 * norm2(h.v_S[i]) - lap_rho[i] / (4 * m * h.rho[i]);
      r[i] = dSdt + m / 2 * norm2(h.v_B[i]) + bracket + U[i];
    }
    out.series.times.push_back(frames.time(j));
    out.series.values.push_back(weighted_rms(r, h.rho, Mask(h.rho.grid(), std::move(skip))));
  }
  return out;
}

ResidualSeries continuity_residual(const FrameSequence& frames, std::span<const VectorField> currents,
                                   const HydroOptions& options) {
  require_frames(frames);
  if (currents.size() != frames.size()) {
    throw PreconditionError("need one current per frame");
  }
  const Real dt = frames.dt_field();
  ResidualSeries out;
  std::vector<ScalarField> rho;
  rho.reserve(frames.size());
  for (const auto& psi : frames.frames()) {
    rho.push_back(density(psi));
  }
  for (std::size_t j = 1; j + 1 < frames.size(); ++j) {
    const auto div = divergence(currents[j], options.backend);
    const auto mask = nodal_mask(rho[j], options.node_epsilon);
    std::vector<Real> r(rho[j].size());
    for (std::size_t i = 0; i < r.size(); ++i) {
      r[i] = (rho[j + 1][i] - rho[j - 1][i]) / (2 * dt) + div[i];
    }
    out.times.push_back(frames.time(j));
    out.values.push_back(weighted_rms(r, rho[j], mask));
  }
  return out;
}

Real ContinuityComparison::max_difference() const {
  Real out = 0;
  for (std::size_t k = 0; k < drift_only.values.size(); ++k) {
    out = std::max(out, std::fabs(drift_only.values[k] - full.values[k]));
  }
  return out;
}

ContinuityComparison continuity_comparison(const FrameSequence& frames, const SpinVector& s,
                                           const HydroOptions& options) {
  std::vector<VectorField> drift;
  std::vector<VectorField> full;
  drift.reserve(frames.size());
  full.reserve(frames.size());
  for (const auto& psi : frames.frames()) {
    drift.push_back(probability_current(psi, frames.mass(), nullptr, options.backend));
    full.push_back(probability_current(psi, frames.mass(), &s, options.backend));
  }
  return {continuity_residual(frames, drift, options), continuity_residual(frames, full, options)};
}

}  // namespace spinhydro
