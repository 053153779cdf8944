#include "spinhydro/harness/runner.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "spinhydro/analytic.hpp"
#include "spinhydro/csv.hpp"
#include "spinhydro/frame_io.hpp"
#include "spinhydro/hydro.hpp"
#include "spinhydro/identities.hpp"
#include "spinhydro/parallel.hpp"
#include "spinhydro/phase.hpp"
#include "spinhydro/propagator.hpp"
#include "spinhydro/residuals.hpp"

namespace spinhydro::harness {
namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

json to_json(const std::vector<Real>& values) {
  json out = json::array();
  for (Real v : values) out.push_back(static_cast<double>(v));
  return out;
}

json to_json(const Vec3& v) { return json::array({double(v.x), double(v.y), double(v.z)}); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write " + path.string());
  }
  out << text;
}

std::vector<std::size_t> evenly_spaced(std::size_t count, int k) {
  std::vector<std::size_t> out;
  if (count == 0) return out;
  const auto want = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(k, 2)));
  for (std::size_t i = 0; i < want; ++i) {
    const std::size_t j = want == 1 ? 0 : (i * (count - 1) + (want - 1) / 2) / (want - 1);
    if (out.empty() || out.back() != j) out.push_back(j);
  }
  return out;
}

std::size_t resolve_frame(int index, std::size_t count) {
  const long c = static_cast<long>(count);
  long j = index < 0 ? c + index : index;
  if (j < 0 || j >= c) {
    throw PreconditionError("output.hydro_frames index " + std::to_string(index) + " outside 0.." +
                            std::to_string(c - 1));
  }
  return static_cast<std::size_t>(j);
}

std::string zero_pad(std::size_t value, int width) {
  std::ostringstream os;
  os << std::setw(width) << std::setfill('0') << value;
  return os.str();
}

std::string error_category(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return "config";
  if (dynamic_cast<const SupportLeakError*>(&e)) return "support_leak";
  if (dynamic_cast<const NodalTrapError*>(&e)) return "nodal_trap";
  if (dynamic_cast<const PreconditionError*>(&e)) return "precondition";
  if (dynamic_cast<const FormatError*>(&e)) return "format";
  return "runtime";
}

// Records results against the configured settings.
class Recorder {
 public:
  Recorder(const DiagnosticsConfig& config, ScenarioReport& report) : config_(config), report_(report) {}

  bool wanted(const std::string& name) const { return config_.get(name).enabled.value_or(true); }

  void add(const std::string& name, Real value, bool assertable, std::string detail = {}) {
    const auto& s = config_.get(name);
    if (!s.enabled.value_or(true)) return;
    DiagnosticResult r;
    r.name = name;
    r.asserted = s.enabled.value_or(assertable);
    r.value = value;
    r.tolerance = s.tolerance;
    r.passed = std::isfinite(static_cast<double>(value)) && value <= s.tolerance;
    r.detail = std::move(detail);
    report_.diagnostics.push_back(std::move(r));
  }

  // Explicitly enabled diagnostics that this scenario cannot evaluate fail.
  void unavailable(const std::string& name, const std::string& why) {
    const auto& s = config_.get(name);
    if (s.enabled.value_or(false)) {
      report_.diagnostics.push_back({name, true, false, std::numeric_limits<Real>::quiet_NaN(), s.tolerance,
                                     "not applicable: " + why});
    }
  }

 private:
  const DiagnosticsConfig& config_;
  ScenarioReport& report_;
};

struct Structure {
  bool single_gaussian{false};
  bool free_gaussian{false};
  bool single_eigenstate{false};
  bool ground_state{false};
  bool spin_normal_to_grid{false};  ///< s has no component along any grid axis
  bool planar_1d{false};            ///< 1D grid with s normal to it
};

Structure classify(const ScenarioConfig& c) {
  Structure s;
  const bool one = c.state.size() == 1;
  s.single_gaussian = one && c.state[0].kind == StateTermConfig::Kind::gaussian;
  s.free_gaussian = s.single_gaussian && c.potential.kind == PotentialKind::free;
  s.single_eigenstate =
      one && c.state[0].kind == StateTermConfig::Kind::eigenstate && c.potential.kind == PotentialKind::harmonic;
  s.ground_state = s.single_eigenstate && c.state[0].quanta[0] == 0 && c.state[0].quanta[1] == 0;
  s.spin_normal_to_grid = true;
  for (int a = 0; a < c.grid.dims; ++a) {
    if (std::fabs(c.spin[a]) > 1e-15L) s.spin_normal_to_grid = false;
  }
  s.planar_1d = c.grid.dims == 1 && s.spin_normal_to_grid;
  return s;
}

Real probability_l2_error(const ComplexField& a, const ComplexField& b) {
  Real sum = 0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::norm(a[i] - b[i]);
  return std::sqrt(sum * a.grid().cell_volume());
}

Vec3 centroid_of(const ComplexField& psi) {
  Vec3 c{};
  Real total = 0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const Real r = std::norm(psi[i]);
    c += psi.grid().position(i) * r;
    total += r;
  }
  return c / total;
}

Real wrap_angle(Real a) { return a - 2 * kPi * std::round(a / (2 * kPi)); }

class Run {
 public:
  Run(const ScenarioConfig& config, const RunOptions& options, ScenarioReport& report)
      : c_(config),
        opt_(options),
        report_(report),
        rec_(config.diagnostics, report),
        shape_(classify(config)),
        spin_(SpinVector::normalized(config.spin)),
        hopt_{config.hydro.backend, config.hydro.node_epsilon} {}

  void execute() {
    const auto t_total = Clock::now();
    out_dir_ = opt_.out_dir.empty() ? c_.output.directory : opt_.out_dir;
    if (!opt_.identities_only) std::filesystem::create_directories(out_dir_);

    auto t = Clock::now();
    const Grid grid = build_grid(c_);
    const Potential potential = build_potential(c_, grid);
    const ComplexField psi0 = init_state(build_state(c_), grid);
    frames_.emplace(evolve(psi0, potential, c_.mass,
                           EvolveOptions{c_.evolution.duration, c_.evolution.dt, c_.evolution.frame_stride, true}));
    report_.timings["evolve"] = seconds_since(t);

    t = Clock::now();
    extract_all();
    report_.timings["hydro"] = seconds_since(t);

    t = Clock::now();
    propagator_checks();
    hydro_checks();
    sampled_identity_checks();
    residual_checks();
    free_gaussian_checks();
    harmonic_checks();
    report_.timings["diagnostics"] = seconds_since(t);

    if (!opt_.identities_only) {
      t = Clock::now();
      trajectories();
      report_.timings["trajectories"] = seconds_since(t);
      t = Clock::now();
      ensembles();
      report_.timings["ensembles"] = seconds_since(t);
      t = Clock::now();
      write_outputs();
      report_.timings["write"] = seconds_since(t);
    }
    report_.timings["total"] = seconds_since(t_total);
    if (!opt_.identities_only) write_meta();
  }

 private:
  const FrameSequence& frames() const { return *frames_; }

  void extract_all() {
    std::vector<std::optional<HydroFields>> tmp(frames().size());
    parallel_for(tmp.size(), opt_.workers,
                 [&](std::size_t j) { tmp[j].emplace(extract_hydro(frames().frame(j), c_.mass, spin_, hopt_)); });
    hydro_.reserve(tmp.size());
    for (auto& h : tmp) hydro_.push_back(std::move(*h));
  }

  void propagator_checks() {
    const std::size_t count = frames().size();
    norms_.resize(count);
    energies_.resize(count);
    parallel_for(count, opt_.workers, [&](std::size_t j) {
      norms_[j] = total_probability(frames().frame(j));
      energies_[j] = energy_expectation(frames().frame(j), frames().potential(), c_.mass);
    });
    Real unitarity = 0, energy = 0;
    const Real e0 = std::fabs(energies_[0]) > 1e-12L ? std::fabs(energies_[0]) : Real{1};
    for (std::size_t j = 0; j < count; ++j) {
      unitarity = std::max(unitarity, std::fabs(norms_[j] - norms_[0]) / norms_[0]);
      energy = std::max(energy, std::fabs(energies_[j] - energies_[0]) / e0);
    }
    rec_.add("unitarity", unitarity, true, "max relative norm drift over frames");
    rec_.add("energy", energy, true, "max relative drift of <H> over frames");
  }

  void hydro_checks() {
    const std::size_t count = hydro_.size();
    dual_q_.assign(count, 0);
    constraints_.resize(count);
    for (std::size_t j = 0; j < count; ++j) {
      const auto& h = hydro_[j];
      dual_q_[j] = max_offnodal_difference(h.Q_amp, h.Q_kin, h.nodal_mask);
      constraints_[j] = spin_constraint_residuals(h.v_B, h.v_S, spin_, h.rho, h.nodal_mask);
    }
    rec_.add("dual_path_q", *std::max_element(dual_q_.begin(), dual_q_.end()), true,
             "max off-nodal |Q_amp - Q_kin| over all frames");

    ConstraintReport worst;
    for (const auto& r : constraints_) {
      worst.spin_norm = std::max(worst.spin_norm, r.spin_norm);
      worst.osmotic_alignment = std::max(worst.osmotic_alignment, r.osmotic_alignment);
      worst.drift_internal_alignment = std::max(worst.drift_internal_alignment, r.drift_internal_alignment);
      worst.kinetic_identity = std::max(worst.kinetic_identity, r.kinetic_identity);
      worst.kinetic_expansion_gap = std::max(worst.kinetic_expansion_gap, r.kinetic_expansion_gap);
    }
    const std::string geometry = shape_.planar_1d ? "1D, s normal to grid"
                                 : shape_.spin_normal_to_grid ? "s normal to grid plane; reported only where it cannot hold"
                                                              : "s has in-grid components; reported only";
    rec_.add("spin_norm", worst.spin_norm, true, "|s^2 - 1|");
    rec_.add("osmotic_alignment", worst.osmotic_alignment, shape_.spin_normal_to_grid, geometry);
    rec_.add("drift_internal_alignment", worst.drift_internal_alignment, shape_.planar_1d, geometry);
    rec_.add("kinetic_identity", worst.kinetic_identity, shape_.planar_1d, geometry);
    rec_.add("kinetic_expansion", worst.kinetic_expansion_gap, true, "algebraic expansion of |v|^2");
  }

  void sampled_identity_checks() {
    sample_ = evenly_spaced(frames().size(), c_.diagnostics.sample_frames);
    const bool irr = rec_.wanted("irrotationality");
    const bool cross = rec_.wanted("cross_scalar") || rec_.wanted("cross_vector") || rec_.wanted("cross_vector_real_part");
    const bool inv = rec_.wanted("invariance");
    const Complex scale = std::polar(c_.diagnostics.invariance_scale, c_.diagnostics.invariance_phase);
    irr_.resize(sample_.size());
    cross_.resize(sample_.size());
    inv_.resize(sample_.size());
    parallel_for(sample_.size(), opt_.workers, [&](std::size_t k) {
      const std::size_t j = sample_[k];
      const auto& psi = frames().frame(j);
      if (irr) irr_[k] = irrotationality(psi, c_.mass, hopt_);
      if (cross) cross_[k] = cross_identities(psi, hydro_[j].v_B, hydro_[j].v_S, c_.mass, hopt_);
      if (inv) inv_[k] = scaling_invariance(psi, scale, c_.mass, spin_, hopt_);
    });
    Real irr_max = 0, sp = 0, vp = 0, vre = 0, inv_max = 0;
    for (std::size_t k = 0; k < sample_.size(); ++k) {
      irr_max = std::max({irr_max, irr_[k].drift, irr_[k].osmotic});
      sp = std::max(sp, cross_[k].scalar_product);
      vp = std::max(vp, cross_[k].vector_product);
      vre = std::max(vre, cross_[k].vector_product_real_part);
      inv_max = std::max(inv_max, inv_[k].max());
    }
    const std::string frames_note = std::to_string(sample_.size()) + " sample frames";
    if (irr) rec_.add("irrotationality", irr_max, true, "max |curl| of drift and osmotic velocities, " + frames_note);
    if (cross) {
      rec_.add("cross_scalar", sp, true, frames_note);
      rec_.add("cross_vector", vp, true, "imaginary-part form, " + frames_note);
      rec_.add("cross_vector_real_part", vre, true, "real part of the same bilinear, " + frames_note);
    }
    if (inv) rec_.add("invariance", inv_max, true, "psi scaled by N e^{i phi}, " + frames_note);
  }

  void residual_checks() {
    if (rec_.wanted("continuity") || rec_.wanted("current_transparency")) {
      continuity_.emplace(continuity_comparison(frames(), spin_, hopt_));
      rec_.add("continuity", continuity_->full.max(), true, "max over frames of rho-weighted RMS");
      rec_.add("current_transparency", continuity_->max_difference(), true,
               "drift-only vs full current residual difference");
    }
    if (rec_.wanted("hamilton_jacobi") || rec_.wanted("phase_path_consistency")) {
      hj_.emplace(hj_residual(frames(), hydro_, hopt_));
      rec_.add("hamilton_jacobi", hj_->series.max(), true, "max over interior frames of rho-weighted RMS");
      rec_.add("phase_path_consistency", hj_->max_path_inconsistency, c_.grid.dims == 2,
               c_.grid.dims == 2 ? "xy vs yx integration paths" : "single path in 1D");
    }
  }

  void free_gaussian_checks() {
    static const char* names[] = {"free_gaussian_l2", "free_gaussian_velocity", "free_gaussian_phase"};
    if (!shape_.free_gaussian) {
      for (const char* n : names) rec_.unavailable(n, "needs a single free Gaussian packet");
    } else {
      const auto& t0 = c_.state[0];
      const GaussianPacket packet{t0.center, t0.width, t0.momentum};
      const FreeGaussianSolution exact(packet, c_.mass, c_.grid.dims);
      const Complex coeff = t0.coefficient / std::abs(t0.coefficient);
      Real l2 = 0, phase_err = 0;
      Real dvB = 0, dvS = 0, vB_scale = 0, vS_scale = 0;
      const Grid& grid = frames().grid();
      for (std::size_t j : sample_) {
        const Real t = frames().time(j);
        const auto& psi = frames().frame(j);
        const auto& h = hydro_[j];
        std::vector<Complex> ref(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) ref[i] = coeff * exact.psi(grid.position(i), t);
        l2 = std::max(l2, probability_l2_error(psi, ComplexField(grid, std::move(ref))));
        const auto phase = reconstruct_phase(psi, h.v_B, h.nodal_mask, c_.mass);
        for (std::size_t i = 0; i < grid.size(); ++i) {
          if (h.nodal_mask[i]) continue;
          const Vec3 x = grid.position(i);
          const Vec3 vb = exact.drift(x, t);
          const Vec3 vs = exact.osmotic(x, t);
          dvB = std::max(dvB, max_abs_component(h.v_B[i] - vb));
          dvS = std::max(dvS, max_abs_component(h.v_S[i] - vs));
          vB_scale = std::max(vB_scale, max_abs_component(vb));
          vS_scale = std::max(vS_scale, max_abs_component(vs));
          if (phase.defined[i]) {
            phase_err = std::max(phase_err, std::fabs(wrap_angle(phase.phase[i] - exact.phase(x, t) - std::arg(coeff))));
          }
        }
      }
      const Real rel = std::max(vB_scale > 0 ? dvB / vB_scale : dvB, vS_scale > 0 ? dvS / vS_scale : dvS);
      rec_.add(names[0], l2, true, "L2 distance to the closed-form packet, " + std::to_string(sample_.size()) + " sample frames");
      rec_.add(names[1], rel, true, "max off-nodal |dv| / max |v_exact|, worst of drift and osmotic");
      rec_.add(names[2], phase_err, true, "reconstructed phase vs closed form, modulo 2 pi");
    }

    const bool free_motion = shape_.single_gaussian && (shape_.free_gaussian || c_.diagnostics.centroid_time);
    if (!free_motion) {
      rec_.unavailable("centroid", "needs a single Gaussian and, unless free, diagnostics.centroid_time");
      return;
    }
    const Real t = c_.diagnostics.centroid_time.value_or(frames().end_time());
    const Real jf = t / frames().dt_field();
    const auto j = static_cast<std::size_t>(std::llround(jf));
    if (std::fabs(jf - static_cast<Real>(j)) > 1e-9L || j >= frames().size()) {
      throw PreconditionError("diagnostics.centroid_time must be a frame time within the run");
    }
    const auto& t0 = c_.state[0];
    const Vec3 expected = t0.center + t0.momentum * (frames().time(j) / c_.mass);
    const Vec3 got = centroid_of(frames().frame(j));
    Real err = 0;
    for (int a = 0; a < c_.grid.dims; ++a) err = std::max(err, std::fabs(got[a] - expected[a]));
    std::ostringstream detail;
    detail << "t = " << format_number(frames().time(j)) << ", centroid x = " << format_number(got.x);
    rec_.add("centroid", err, true, detail.str());
  }

  void harmonic_checks() {
    static const char* ground[] = {"harmonic_drift", "harmonic_osmotic", "harmonic_q0"};
    static const char* eigen[] = {"stationarity", "eigenphase_rate"};
    if (!shape_.ground_state) {
      for (const char* n : ground) rec_.unavailable(n, "needs a harmonic ground state");
    }
    if (!shape_.single_eigenstate) {
      for (const char* n : eigen) rec_.unavailable(n, "needs a single harmonic eigenstate");
      return;
    }
    const auto omega = c_.potential.omega;
    const Grid& grid = frames().grid();
    if (shape_.ground_state) {
      Real drift = 0, osm = 0, q0 = 0;
      Real q_expected = 0;
      for (int a = 0; a < grid.dims(); ++a) q_expected += omega[static_cast<std::size_t>(a)] / 2;
      const std::size_t origin = grid.index(grid.n() / 2, grid.dims() == 2 ? grid.n() / 2 : 0);
      for (const auto& h : hydro_) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
          if (h.nodal_mask[i]) continue;
          const Vec3 x = grid.position(i);
          drift = std::max(drift, max_abs_component(h.v_B[i]));
          for (int a = 0; a < grid.dims(); ++a) {
            osm = std::max(osm, std::fabs(h.v_S[i][a] + omega[static_cast<std::size_t>(a)] * x[a]));
          }
        }
        q0 = std::max(q0, std::fabs(h.Q_amp[origin] - q_expected));
      }
      rec_.add("harmonic_drift", drift, true, "max off-nodal |v_B|");
      rec_.add("harmonic_osmotic", osm, true, "max off-nodal |v_S + omega x|");
      rec_.add("harmonic_q0", q0, true, "|Q(0) - sum omega / 2| over frames");
    }

    Real stationarity = 0;
    const auto& rho0 = hydro_[0].rho;
    for (const auto& h : hydro_) {
      for (std::size_t i = 0; i < grid.size(); ++i) stationarity = std::max(stationarity, std::fabs(h.rho[i] - rho0[i]));
    }
    rec_.add("stationarity", stationarity, true, "max |rho(t) - rho(0)|");

    const auto& q = c_.state[0].quanta;
    Real energy = 0;
    for (int a = 0; a < grid.dims(); ++a) {
      energy += omega[static_cast<std::size_t>(a)] * (static_cast<Real>(q[static_cast<std::size_t>(a)]) + Real{0.5});
    }
    Real rate_err = 0;
    for (std::size_t j = 0; j + 1 < frames().size(); ++j) {
      const auto& a = frames().frame(j);
      const auto& b = frames().frame(j + 1);
      Complex overlap{};
      for (std::size_t i = 0; i < a.size(); ++i) overlap += std::conj(a[i]) * b[i];
      const Real rate = -std::arg(overlap) / frames().dt_field();
      rate_err = std::max(rate_err, std::fabs(rate - energy));
    }
    rec_.add("eigenphase_rate", rate_err, true, "phase advance rate vs omega (n + 1/2)");
  }

  void trajectories() {
    const auto& tc = c_.trajectories;
    const bool any_traj = tc.enabled && (!tc.seeds.empty() || !tc.splits.empty());
    if (any_traj || (c_.ensemble.enabled && !c_.ensemble.modes.empty())) {
      cache_.emplace(frames(), spin_, std::span<const HydroFields>(hydro_));
    }
    if (!any_traj) {
      for (const char* n : {"trajectory_sum", "perpendicularity", "split_ambiguity"}) {
        rec_.unavailable(n, "no trajectories configured");
      }
      return;
    }
    const AdvectOptions aopt{tc.dt, 0, tc.mode, tc.nodal_hold_steps, 1};
    std::vector<std::optional<Trajectory>> tmp(tc.seeds.size());
    parallel_for(tmp.size(), opt_.workers,
                 [&](std::size_t k) { tmp[k].emplace(advect(*cache_, SplitSpec::external_only(tc.seeds[k]), aopt)); });
    Real sum_err = 0, perp = 0;
    std::size_t events = 0;
    for (auto& t : tmp) {
      const Vec3 c0 = t->x_total[0] - (t->x_ext[0] + t->x_int[0]);
      for (std::size_t k = 0; k < t->times.size(); ++k) {
        sum_err = std::max(sum_err, max_abs_component(t->x_total[k] - (t->x_ext[k] + t->x_int[k]) - c0));
        perp = std::max(perp, std::fabs(dot(t->v_B_along[k], t->v_perp_along[k])));
      }
      events += t->nodal_events.size();
      trajectories_.push_back(std::move(*t));
    }
    if (!trajectories_.empty()) {
      rec_.add("trajectory_sum", sum_err, true, std::to_string(trajectories_.size()) + " trajectories");
      rec_.add("perpendicularity", perp, shape_.planar_1d,
               shape_.planar_1d ? "max |v_B . (v_S x s)| along paths"
                                : "max |v_B . (v_S x s)| along paths; reported only outside 1D with s normal");
    }
    nodal_events_ = events;

    if (tc.splits.empty()) {
      rec_.unavailable("split_ambiguity", "no split pairs configured");
      return;
    }
    Real split = 0;
    std::ostringstream detail;
    for (const auto& p : tc.splits) {
      const auto r = split_ambiguity_check(p.a, p.b, *cache_, aopt);
      split = std::max({split, r.total_difference, r.offset_error});
      detail << "offset " << format_number(r.initial_offset) << " -> max ext diff "
             << format_number(r.external_difference) << "; ";
    }
    rec_.add("split_ambiguity", split, true, detail.str());
  }

  void ensembles() {
    const auto& ec = c_.ensemble;
    if (!ec.enabled) {
      rec_.unavailable("equivariance", "ensemble disabled");
      rec_.unavailable("trapped_fraction", "ensemble disabled");
      return;
    }
    bins_ = ec.bins > 0 ? ec.bins : default_bins(ec.n);
    Real equiv = 0, trapped = 0;
    std::ostringstream detail;
    for (VelocityMode mode : ec.modes) {
      const auto t = Clock::now();
      EnsembleOptions eo;
      eo.n = ec.n;
      eo.seed = ec.seed;
      eo.mode = mode;
      eo.dt_traj = ec.dt;
      eo.workers = opt_.workers;
      eo.record_every_frames = ec.record_every;
      auto ens = run_ensemble(frames(), *cache_, eo);
      auto tv = tv_series(ens, frames(), bins_);
      const Real rise = *std::max_element(tv.begin(), tv.end()) - tv.front();
      equiv = std::max(equiv, rise);
      trapped = std::max(trapped, static_cast<Real>(ens.trapped_count) / static_cast<Real>(ens.n));
      detail << to_string(mode) << ": TV0 " << format_number(tv.front()) << ", max rise " << format_number(rise) << "; ";
      report_.timings[std::string("ensemble_") + to_string(mode)] = seconds_since(t);
      ensembles_.push_back({std::move(ens), std::move(tv)});
    }
    rec_.add("equivariance", equiv, true, detail.str());
    rec_.add("trapped_fraction", trapped, true, "trapped / n, worst mode");
  }

  void write_outputs() {
    const std::string hash = report_.config_hash;
    write_frames(frames(), out_dir_ / "frames.bin");
    write_text(out_dir_ / "config.yaml", describe(c_, false));

    std::vector<std::size_t> hydro_frames;
    for (int f : c_.output.hydro_frames) {
      const std::size_t j = resolve_frame(f, frames().size());
      if (std::find(hydro_frames.begin(), hydro_frames.end(), j) == hydro_frames.end()) hydro_frames.push_back(j);
    }
    std::sort(hydro_frames.begin(), hydro_frames.end());
    for (std::size_t j : hydro_frames) write_hydro_csv(out_dir_ / ("hydro_" + zero_pad(j, 4) + ".csv"), hydro_[j]);

    json sidecar;
    sidecar["format"] = "SPHYFRM1";
    sidecar["layout"] =
        "header: magic[8], u32 dims, u32 n, f64 extent, f64 mass, f64 dt_field, u64 frame_count; "
        "then per frame n^dims complex samples as f64 (re, im), little endian, axis 0 fastest";
    sidecar["scenario"] = c_.name;
    sidecar["config_hash"] = hash;
    sidecar["dims"] = c_.grid.dims;
    sidecar["n"] = c_.grid.n;
    sidecar["extent"] = double(c_.grid.extent);
    sidecar["mass"] = double(c_.mass);
    sidecar["dt"] = double(c_.evolution.dt);
    sidecar["frame_stride"] = c_.evolution.frame_stride;
    sidecar["dt_field"] = double(frames().dt_field());
    sidecar["frame_count"] = frames().size();
    sidecar["potential"] = to_string(c_.potential.kind);
    sidecar["spin"] = to_json(spin_.value());
    sidecar["backend"] = to_string(c_.hydro.backend);
    sidecar["node_epsilon"] = double(c_.hydro.node_epsilon);
    sidecar["hydro_frames"] = hydro_frames;
    sidecar["trajectory_count"] = trajectories_.size();
    json modes = json::array();
    for (const auto& e : ensembles_) modes.push_back(to_string(e.ensemble.mode));
    sidecar["ensemble_modes"] = modes;
    write_text(out_dir_ / "frames.json", sidecar.dump(2) + "\n");

    json res;
    res["config_hash"] = hash;
    std::vector<Real> times(frames().size());
    for (std::size_t j = 0; j < times.size(); ++j) times[j] = frames().time(j);
    res["times"] = to_json(times);
    res["norm"] = to_json(norms_);
    res["energy"] = to_json(energies_);
    res["dual_path_q"] = to_json(dual_q_);
    std::vector<Real> a, b, k, e;
    for (const auto& r : constraints_) {
      a.push_back(r.osmotic_alignment);
      b.push_back(r.drift_internal_alignment);
      k.push_back(r.kinetic_identity);
      e.push_back(r.kinetic_expansion_gap);
    }
    res["spin_constraints"] = {{"spin_norm", double(constraints_.front().spin_norm)},
                               {"osmotic_alignment", to_json(a)},
                               {"drift_internal_alignment", to_json(b)},
                               {"kinetic_identity", to_json(k)},
                               {"kinetic_expansion", to_json(e)}};
    if (continuity_) {
      res["continuity"] = {{"times", to_json(continuity_->full.times)},
                           {"full", to_json(continuity_->full.values)},
                           {"drift_only", to_json(continuity_->drift_only.values)}};
    }
    if (hj_) {
      res["hamilton_jacobi"] = {{"times", to_json(hj_->series.times)},
                                {"values", to_json(hj_->series.values)},
                                {"max_path_inconsistency", double(hj_->max_path_inconsistency)}};
    }
    json sampled;
    sampled["frames"] = sample_;
    std::vector<Real> id, io, cs, cv, cr, iv;
    for (std::size_t s = 0; s < sample_.size(); ++s) {
      id.push_back(irr_[s].drift);
      io.push_back(irr_[s].osmotic);
      cs.push_back(cross_[s].scalar_product);
      cv.push_back(cross_[s].vector_product);
      cr.push_back(cross_[s].vector_product_real_part);
      iv.push_back(inv_[s].max());
    }
    sampled["irrotationality_drift"] = to_json(id);
    sampled["irrotationality_osmotic"] = to_json(io);
    sampled["cross_scalar"] = to_json(cs);
    sampled["cross_vector"] = to_json(cv);
    sampled["cross_vector_real_part"] = to_json(cr);
    sampled["invariance"] = to_json(iv);
    res["sampled"] = sampled;
    write_text(out_dir_ / "residuals.json", res.dump(2) + "\n");

    for (std::size_t i = 0; i < trajectories_.size(); ++i) {
      write_trajectory_csv(out_dir_ / ("trajectory_" + zero_pad(i, 2) + ".csv"), trajectories_[i]);
    }

    for (const auto& [ens, tv] : ensembles_) {
      const std::string mode = to_string(ens.mode);
      json j;
      j["config_hash"] = hash;
      j["seed"] = ens.seed;
      j["n"] = ens.n;
      j["mode"] = mode;
      j["bins"] = bins_;
      j["dt_traj"] = double(c_.ensemble.dt);
      j["trapped_count"] = ens.trapped_count;
      j["times"] = to_json(ens.record_times);
      j["tv"] = to_json(tv);
      write_text(out_dir_ / ("ensemble_" + mode + ".json"), j.dump(2) + "\n");
      if (c_.ensemble.dump_trajectories) {
        std::ofstream out(out_dir_ / ("ensemble_" + mode + "_trajectories.csv"), std::ios::binary);
        std::vector<std::string> header{"trajectory", "time", "x"};
        if (ens.dims == 2) header.push_back("y");
        header.push_back("trapped");
        CsvWriter w(out, header);
        for (std::size_t i = 0; i < ens.n; ++i) {
          for (std::size_t r = 0; r < ens.record_times.size(); ++r) {
            const auto p = ens.position(r, i);
            std::vector<Real> row{Real(i), ens.record_times[r], p[0]};
            if (ens.dims == 2) row.push_back(p[1]);
            row.push_back(ens.trapped[i]);
            w.row(row);
          }
        }
      }
    }
    write_text(out_dir_ / "report.json", report_json(report_));
  }

  void write_meta() {
    json meta;
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream ts;
    ts << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    meta["timestamp"] = ts.str();
    meta["workers"] = opt_.workers;
    meta["timings_seconds"] = report_.timings;
    meta["nodal_events"] = nodal_events_;
    write_text(out_dir_ / "run_meta.json", meta.dump(2) + "\n");
  }

  struct EnsembleResult {
    Ensemble ensemble;
    std::vector<Real> tv;
  };

  const ScenarioConfig& c_;
  const RunOptions& opt_;
  ScenarioReport& report_;
  Recorder rec_;
  Structure shape_;
  SpinVector spin_;
  HydroOptions hopt_;
  std::filesystem::path out_dir_;

  std::optional<FrameSequence> frames_;
  std::vector<HydroFields> hydro_;
  std::vector<Real> norms_, energies_, dual_q_;
  std::vector<ConstraintReport> constraints_;
  std::vector<std::size_t> sample_;
  std::vector<IrrotationalityReport> irr_;
  std::vector<IdentityReport> cross_;
  std::vector<InvarianceReport> inv_;
  std::optional<ContinuityComparison> continuity_;
  std::optional<HamiltonJacobiResidual> hj_;
  std::optional<FieldCache> cache_;
  std::vector<Trajectory> trajectories_;
  std::size_t nodal_events_{0};
  std::vector<EnsembleResult> ensembles_;
  int bins_{0};
};

}  // namespace

bool ScenarioReport::passed() const {
  return std::all_of(diagnostics.begin(), diagnostics.end(), [](const auto& d) { return !d.asserted || d.passed; });
}

const DiagnosticResult* ScenarioReport::find(const std::string& name) const {
  for (const auto& d : diagnostics) {
    if (d.name == name) return &d;
  }
  return nullptr;
}

std::string report_json(const ScenarioReport& report) {
  json j;
  j["scenario"] = report.scenario;
  j["config_hash"] = report.config_hash;
  j["passed"] = report.passed();
  json list = json::array();
  for (const auto& d : report.diagnostics) {
    json e;
    e["name"] = d.name;
    e["asserted"] = d.asserted;
    e["passed"] = d.passed;
    e["value"] = std::isfinite(static_cast<double>(d.value)) ? json(double(d.value)) : json(nullptr);
    e["tolerance"] = double(d.tolerance);
    e["detail"] = d.detail;
    list.push_back(e);
  }
  j["diagnostics"] = list;
  return j.dump(2) + "\n";
}

void write_error_report(const std::filesystem::path& dir, const std::string& category, const std::string& message) {
  std::filesystem::create_directories(dir);
  json j;
  j["category"] = category;
  j["message"] = message;
  write_text(dir / "error.json", j.dump(2) + "\n");
}

ScenarioReport run_scenario(const ScenarioConfig& config, const RunOptions& options) {
  ScenarioReport report;
  report.scenario = config.name;
  report.config_hash = hash_hex(config_hash(config));
  try {
    Run(config, options, report).execute();
  } catch (const std::exception& e) {
    if (!options.identities_only) {
      write_error_report(options.out_dir.empty() ? config.output.directory : options.out_dir, error_category(e),
                         e.what());
    }
    throw;
  }
  return report;
}

}  // namespace spinhydro::harness
