#include "spinhydro/harness/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "spinhydro/csv.hpp"

namespace spinhydro::harness {
namespace {

// Loose tolerance for accepting a spin vector typed with rounded decimals;
// anything inside is renormalized exactly, anything outside is rejected.
constexpr Real kSpinAcceptance = 1e-6L;

int line_of(const YAML::Node& node) {
  const auto mark = node.Mark();
  return mark.is_null() ? 0 : mark.line + 1;
}

[[noreturn]] void fail(const std::string& path, const YAML::Node& node, const std::string& message) {
  throw ConfigError(path, line_of(node), message);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Typed access to one YAML mapping with unknown-key detection.
class Section {
 public:
  Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) {
      fail(path_.empty() ? "<root>" : path_, node_, "expected a mapping");
    }
  }

  void allow(std::initializer_list<const char*> keys) const {
    if (!node_ || node_.IsNull()) {
      return;
    }
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) {
        fail(join(path_, key), kv.first, "unknown key '" + key + "'");
      }
    }
  }

  bool has(const char* key) const { return node_ && node_.IsMap() && node_[key]; }
  YAML::Node raw(const char* key) const { return has(key) ? node_[key] : YAML::Node(); }
  std::string path(const char* key) const { return join(path_, key); }
  Section child(const char* key) const { return Section(raw(key), path(key)); }
  const YAML::Node& node() const { return node_; }

  template <typename T>
  T get(const char* key, T fallback) const {
    if (!has(key)) {
      return fallback;
    }
    return convert<T>(node_[key], path(key));
  }

  template <typename T>
  static T convert(const YAML::Node& n, const std::string& path) {
    if (!n.IsScalar()) {
      fail(path, n, "expected a scalar value");
    }
    try {
      if constexpr (std::is_same_v<T, Real>) {
        return static_cast<Real>(n.as<double>());
      } else {
        return n.as<T>();
      }
    } catch (const YAML::Exception&) {
      fail(path, n, "cannot convert '" + n.Scalar() + "'");
    }
  }

 private:
  YAML::Node node_;
  std::string path_;
};

std::vector<Real> read_numbers(const YAML::Node& n, const std::string& path) {
  if (!n.IsSequence()) {
    fail(path, n, "expected a list of numbers");
  }
  std::vector<Real> out;
  for (std::size_t i = 0; i < n.size(); ++i) {
    out.push_back(Section::convert<Real>(n[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

// Up to 3 numbers; missing components are 0 (or `pad`).
Vec3 read_vec(const YAML::Node& n, const std::string& path, std::size_t min_len, Real pad = 0) {
  const auto v = read_numbers(n, path);
  if (v.size() < min_len || v.size() > 3) {
    fail(path, n, "expected between " + std::to_string(min_len) + " and 3 numbers");
  }
  Vec3 out{pad, pad, pad};
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[static_cast<int>(i)] = v[i];
  }
  return out;
}

std::array<Real, 2> read_pair(const YAML::Node& n, const std::string& path, std::size_t dims) {
  const auto v = read_numbers(n, path);
  if (v.size() < dims || v.size() > 2) {
    fail(path, n, "expected " + std::to_string(dims) + " number(s), one per grid axis");
  }
  return {v[0], v.size() > 1 ? v[1] : v[0]};
}

Complex read_complex(const YAML::Node& n, const std::string& path) {
  if (n.IsScalar()) {
    return {Section::convert<Real>(n, path), 0};
  }
  const auto v = read_numbers(n, path);
  if (v.size() != 2) {
    fail(path, n, "expected a number or [re, im]");
  }
  return {v[0], v[1]};
}

Backend parse_backend(const std::string& s, const std::string& path, const YAML::Node& n) {
  if (s == "spectral") return Backend::spectral;
  if (s == "fd2") return Backend::fd2;
  fail(path, n, "unknown backend '" + s + "' (expected spectral or fd2)");
}

PotentialKind parse_potential_kind(const std::string& s, const std::string& path, const YAML::Node& n) {
  if (s == "free") return PotentialKind::free;
  if (s == "harmonic") return PotentialKind::harmonic;
  if (s == "barrier") return PotentialKind::barrier;
  if (s == "tabulated") return PotentialKind::tabulated;
  fail(path, n, "unknown potential kind '" + s + "'");
}

VelocityMode parse_mode(const YAML::Node& n, const std::string& path) {
  try {
    return parse_velocity_mode(Section::convert<std::string>(n, path));
  } catch (const PreconditionError& e) {
    fail(path, n, e.what());
  }
}

bool is_multiple(Real value, Real unit) {
  const Real q = value / unit;
  return std::fabs(q - std::round(q)) <= 1e-9L * std::max(Real{1}, std::fabs(q)) && std::round(q) >= 1;
}

void parse_grid(const Section& s, ScenarioConfig& c) {
  s.allow({"dims", "n", "extent"});
  c.grid.dims = s.get<int>("dims", c.grid.dims);
  c.grid.n = s.get<int>("n", c.grid.n);
  c.grid.extent = s.get<Real>("extent", c.grid.extent);
  try {
    make_grid(c.grid.dims, c.grid.n, c.grid.extent);
  } catch (const PreconditionError& e) {
    fail(s.path("n"), s.node(), e.what());
  }
}

void parse_potential(const Section& s, ScenarioConfig& c) {
  s.allow({"kind", "omega", "height", "center", "width", "values"});
  auto& p = c.potential;
  if (s.has("kind")) {
    p.kind = parse_potential_kind(s.get<std::string>("kind", ""), s.path("kind"), s.raw("kind"));
  }
  if (s.has("omega")) p.omega = read_pair(s.raw("omega"), s.path("omega"), static_cast<std::size_t>(c.grid.dims));
  p.height = s.get<Real>("height", p.height);
  p.center = s.get<Real>("center", p.center);
  p.width = s.get<Real>("width", p.width);
  if (s.has("values")) p.values = read_numbers(s.raw("values"), s.path("values"));
  if (p.kind == PotentialKind::tabulated) {
    const std::size_t expected = c.grid.dims == 2 ? static_cast<std::size_t>(c.grid.n) * c.grid.n
                                                  : static_cast<std::size_t>(c.grid.n);
    if (p.values.size() != expected) {
      fail(s.path("values"), s.raw("values"), "tabulated potential needs " + std::to_string(expected) + " values");
    }
  }
  if (p.kind == PotentialKind::harmonic && !(p.omega[0] > 0 && p.omega[1] > 0)) {
    fail(s.path("omega"), s.raw("omega"), "harmonic omega must be positive");
  }
  if (p.kind == PotentialKind::barrier && !(p.width > 0)) {
    fail(s.path("width"), s.raw("width"), "barrier width must be positive");
  }
}

void parse_state(const YAML::Node& n, const std::string& path, ScenarioConfig& c) {
  if (!n.IsSequence() || n.size() == 0) {
    fail(path, n, "expected a non-empty list of state terms");
  }
  c.state.clear();
  for (std::size_t i = 0; i < n.size(); ++i) {
    const Section s(n[i], path + "[" + std::to_string(i) + "]");
    StateTermConfig t;
    const auto kind = s.get<std::string>("kind", "gaussian");
    if (kind == "gaussian") {
      s.allow({"kind", "coefficient", "center", "width", "momentum"});
      t.kind = StateTermConfig::Kind::gaussian;
      if (s.has("center")) t.center = read_vec(s.raw("center"), s.path("center"), static_cast<std::size_t>(c.grid.dims));
      if (s.has("width")) t.width = read_vec(s.raw("width"), s.path("width"), static_cast<std::size_t>(c.grid.dims), 1);
      if (s.has("momentum"))
        t.momentum = read_vec(s.raw("momentum"), s.path("momentum"), static_cast<std::size_t>(c.grid.dims));
      if (c.grid.dims == 1) {
        t.width.y = t.width.z = 1;
      }
    } else if (kind == "eigenstate") {
      s.allow({"kind", "coefficient", "quanta", "omega", "match_integrator"});
      t.kind = StateTermConfig::Kind::eigenstate;
      if (s.has("quanta")) {
        const auto q = read_pair(s.raw("quanta"), s.path("quanta"), static_cast<std::size_t>(c.grid.dims));
        for (int a = 0; a < 2; ++a) {
          const Real v = q[static_cast<std::size_t>(a)];
          if (v < 0 || v != std::floor(v)) {
            fail(s.path("quanta"), s.raw("quanta"), "quanta must be non-negative integers");
          }
          t.quanta[static_cast<std::size_t>(a)] = static_cast<int>(v);
        }
        if (c.grid.dims == 1) t.quanta[1] = 0;
      }
      if (s.has("omega")) t.omega = read_pair(s.raw("omega"), s.path("omega"), static_cast<std::size_t>(c.grid.dims));
      t.match_integrator = s.get<bool>("match_integrator", t.match_integrator);
    } else {
      fail(s.path("kind"), s.raw("kind"), "unknown state kind '" + kind + "' (expected gaussian or eigenstate)");
    }
    if (s.has("coefficient")) t.coefficient = read_complex(s.raw("coefficient"), s.path("coefficient"));
    c.state.push_back(t);
  }
}

void parse_evolution(const Section& s, ScenarioConfig& c) {
  s.allow({"duration", "dt", "frame_stride"});
  auto& e = c.evolution;
  e.duration = s.get<Real>("duration", e.duration);
  e.dt = s.get<Real>("dt", e.dt);
  e.frame_stride = s.get<int>("frame_stride", e.frame_stride);
  if (!(e.duration > 0)) fail(s.path("duration"), s.raw("duration"), "duration must be positive");
  if (!(e.dt > 0)) fail(s.path("dt"), s.raw("dt"), "dt must be positive");
  if (e.frame_stride < 1) fail(s.path("frame_stride"), s.raw("frame_stride"), "frame_stride must be >= 1");
  if (!is_multiple(e.duration, e.dt * e.frame_stride)) {
    fail(s.path("duration"), s.raw("duration"), "duration must be a whole number of frame intervals (dt * frame_stride)");
  }
}

void parse_hydro(const Section& s, ScenarioConfig& c) {
  s.allow({"backend", "node_epsilon"});
  if (s.has("backend")) c.hydro.backend = parse_backend(s.get<std::string>("backend", ""), s.path("backend"), s.raw("backend"));
  c.hydro.node_epsilon = s.get<Real>("node_epsilon", c.hydro.node_epsilon);
  if (!(c.hydro.node_epsilon >= 0 && c.hydro.node_epsilon < 1)) {
    fail(s.path("node_epsilon"), s.raw("node_epsilon"), "node_epsilon must lie in [0, 1)");
  }
}

void parse_trajectories(const Section& s, ScenarioConfig& c) {
  s.allow({"enabled", "dt", "mode", "seeds", "splits", "nodal_hold_steps"});
  auto& t = c.trajectories;
  const auto dims = static_cast<std::size_t>(c.grid.dims);
  t.enabled = s.get<bool>("enabled", t.enabled);
  t.dt = s.get<Real>("dt", t.dt);
  if (s.has("mode")) t.mode = parse_mode(s.raw("mode"), s.path("mode"));
  t.nodal_hold_steps = s.get<int>("nodal_hold_steps", t.nodal_hold_steps);
  if (s.has("seeds")) {
    const auto n = s.raw("seeds");
    if (!n.IsSequence()) fail(s.path("seeds"), n, "expected a list of positions");
    t.seeds.clear();
    for (std::size_t i = 0; i < n.size(); ++i) {
      t.seeds.push_back(read_vec(n[i], s.path("seeds") + "[" + std::to_string(i) + "]", dims));
    }
  }
  if (s.has("splits")) {
    const auto n = s.raw("splits");
    if (!n.IsSequence()) fail(s.path("splits"), n, "expected a list of split pairs");
    t.splits.clear();
    for (std::size_t i = 0; i < n.size(); ++i) {
      const std::string p = s.path("splits") + "[" + std::to_string(i) + "]";
      const Section pair(n[i], p);
      pair.allow({"a", "b"});
      auto read_split = [&](const char* key) {
        const Section sp = pair.child(key);
        sp.allow({"external", "internal"});
        if (!sp.has("external") || !sp.has("internal")) {
          fail(pair.path(key), pair.raw(key), "split needs 'external' and 'internal'");
        }
        return SplitSpec::make(read_vec(sp.raw("external"), sp.path("external"), dims),
                               read_vec(sp.raw("internal"), sp.path("internal"), dims));
      };
      if (!pair.has("a") || !pair.has("b")) fail(p, n[i], "split pair needs 'a' and 'b'");
      SplitPair sp{read_split("a"), read_split("b")};
      if (!(sp.a.x0_total == sp.b.x0_total)) {
        fail(p, n[i], "splits of a pair must sum to the same total position");
      }
      t.splits.push_back(sp);
    }
  }
  const Real dt_field = c.evolution.dt * c.evolution.frame_stride;
  if (!(t.dt > 0) || t.dt > dt_field * (1 + 1e-12L)) {
    fail(s.path("dt"), s.raw("dt"), "trajectory dt must satisfy 0 < dt <= dt_field");
  }
  if (!is_multiple(c.evolution.duration, t.dt)) {
    fail(s.path("dt"), s.raw("dt"), "evolution duration must be a whole number of trajectory steps");
  }
  if (t.nodal_hold_steps < 0) fail(s.path("nodal_hold_steps"), s.raw("nodal_hold_steps"), "must be >= 0");
  const Real half = c.grid.extent / 2;
  auto inside = [&](const Vec3& x) {
    for (int a = 0; a < c.grid.dims; ++a) {
      if (x[a] < -half || x[a] >= half) return false;
    }
    return true;
  };
  for (const auto& x : t.seeds) {
    if (!inside(x)) fail(s.path("seeds"), s.raw("seeds"), "trajectory seed outside the grid");
  }
  for (const auto& p : t.splits) {
    if (!inside(p.a.x0_total)) fail(s.path("splits"), s.raw("splits"), "split total position outside the grid");
  }
}

void parse_ensemble(const Section& s, ScenarioConfig& c) {
  s.allow({"enabled", "n", "seed", "bins", "modes", "dt", "record_every", "dump_trajectories"});
  auto& e = c.ensemble;
  e.enabled = s.get<bool>("enabled", s.has("n") ? true : e.enabled);
  e.n = s.get<std::size_t>("n", e.n);
  e.seed = s.get<std::uint64_t>("seed", e.seed);
  e.bins = s.get<int>("bins", e.bins);
  e.dt = s.get<Real>("dt", e.dt);
  e.record_every = s.get<int>("record_every", e.record_every);
  e.dump_trajectories = s.get<bool>("dump_trajectories", e.dump_trajectories);
  if (s.has("modes")) {
    const auto n = s.raw("modes");
    if (!n.IsSequence() || n.size() == 0) fail(s.path("modes"), n, "expected a non-empty list of modes");
    e.modes.clear();
    for (std::size_t i = 0; i < n.size(); ++i) {
      e.modes.push_back(parse_mode(n[i], s.path("modes") + "[" + std::to_string(i) + "]"));
    }
  }
  if (e.n < kMinEnsembleSize) fail(s.path("n"), s.raw("n"), "ensemble n must be >= 100");
  if (e.bins < 0) fail(s.path("bins"), s.raw("bins"), "bins must be >= 0 (0 = default)");
  if (e.record_every < 1) fail(s.path("record_every"), s.raw("record_every"), "record_every must be >= 1");
  const Real dt_field = c.evolution.dt * c.evolution.frame_stride;
  if (!(e.dt > 0) || !is_multiple(dt_field, e.dt)) {
    fail(s.path("dt"), s.raw("dt"), "ensemble dt must divide dt_field");
  }
}

void parse_diagnostics(const Section& s, ScenarioConfig& c) {
  std::vector<const char*> keys{"sample_frames", "invariance_scale", "invariance_phase", "centroid_time"};
  for (const auto& [name, tol] : DiagnosticsConfig::catalogue()) {
    keys.push_back(name.c_str());
  }
  if (s.node() && s.node().IsMap()) {
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& kv : s.node()) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) fail(s.path(key.c_str()), kv.first, "unknown key '" + key + "'");
    }
  }
  auto& d = c.diagnostics;
  d.sample_frames = s.get<int>("sample_frames", d.sample_frames);
  d.invariance_scale = s.get<Real>("invariance_scale", d.invariance_scale);
  d.invariance_phase = s.get<Real>("invariance_phase", d.invariance_phase);
  if (s.has("centroid_time")) d.centroid_time = s.get<Real>("centroid_time", 0);
  if (d.sample_frames < 2) fail(s.path("sample_frames"), s.raw("sample_frames"), "sample_frames must be >= 2");
  if (!(d.invariance_scale > 0)) fail(s.path("invariance_scale"), s.raw("invariance_scale"), "must be positive");
  for (const auto& [name, tol] : DiagnosticsConfig::catalogue()) {
    if (!s.has(name.c_str())) {
      continue;
    }
    const Section entry = s.child(name.c_str());
    entry.allow({"enabled", "tolerance"});
    auto& setting = d.settings[name];
    if (entry.has("enabled")) setting.enabled = entry.get<bool>("enabled", true);
    setting.tolerance = entry.get<Real>("tolerance", setting.tolerance);
    if (!(setting.tolerance >= 0)) fail(entry.path("tolerance"), entry.raw("tolerance"), "tolerance must be >= 0");
  }
}

void parse_output(const Section& s, ScenarioConfig& c) {
  s.allow({"directory", "hydro_frames"});
  if (s.has("directory")) c.output.directory = s.get<std::string>("directory", "");
  if (s.has("hydro_frames")) {
    const auto n = s.raw("hydro_frames");
    if (!n.IsSequence()) fail(s.path("hydro_frames"), n, "expected a list of frame indices");
    c.output.hydro_frames.clear();
    for (std::size_t i = 0; i < n.size(); ++i) {
      c.output.hydro_frames.push_back(Section::convert<int>(n[i], s.path("hydro_frames")));
    }
  }
}

// Guards of downstream modules that can be checked without running anything.
void check_static_guards(const YAML::Node& root, ScenarioConfig& c) {
  const Grid grid = build_grid(c);
  const Potential pot = build_potential(c, grid);
  if (!(c.evolution.dt * pot.max_abs() < 0.5L)) {
    fail("evolution.dt", root["evolution"], "dt * max|U| must stay below 0.5");
  }
  try {
    init_state(build_state(c), grid);
  } catch (const PreconditionError& e) {
    fail("state", root["state"], e.what());
  }
}

void emit_vec(YAML::Emitter& out, const Vec3& v, int count) {
  out << YAML::Flow << YAML::BeginSeq;
  for (int a = 0; a < count; ++a) out << format_number(v[a]);
  out << YAML::EndSeq;
}

void emit_pair(YAML::Emitter& out, const std::array<Real, 2>& v, int count) {
  out << YAML::Flow << YAML::BeginSeq;
  for (int a = 0; a < count; ++a) out << format_number(v[static_cast<std::size_t>(a)]);
  out << YAML::EndSeq;
}

std::string render(const ScenarioConfig& c, bool include_output_dir) {
  const int d = c.grid.dims;
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << c.name;
  if (!c.description.empty()) out << YAML::Key << "description" << YAML::Value << YAML::Literal << c.description;
  out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dims" << YAML::Value << c.grid.dims << YAML::Key << "n" << YAML::Value << c.grid.n;
  out << YAML::Key << "extent" << YAML::Value << format_number(c.grid.extent) << YAML::EndMap;
  out << YAML::Key << "mass" << YAML::Value << format_number(c.mass);

  out << YAML::Key << "potential" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << to_string(c.potential.kind);
  switch (c.potential.kind) {
    case PotentialKind::harmonic:
      out << YAML::Key << "omega" << YAML::Value;
      emit_pair(out, c.potential.omega, d);
      break;
    case PotentialKind::barrier:
      out << YAML::Key << "height" << YAML::Value << format_number(c.potential.height);
      out << YAML::Key << "center" << YAML::Value << format_number(c.potential.center);
      out << YAML::Key << "width" << YAML::Value << format_number(c.potential.width);
      break;
    case PotentialKind::tabulated:
      out << YAML::Key << "values" << YAML::Value << YAML::Flow << YAML::BeginSeq;
      for (Real v : c.potential.values) out << format_number(v);
      out << YAML::EndSeq;
      break;
    case PotentialKind::free:
      break;
  }
  out << YAML::EndMap;

  out << YAML::Key << "state" << YAML::Value << YAML::BeginSeq;
  for (const auto& t : c.state) {
    out << YAML::BeginMap;
    out << YAML::Key << "coefficient" << YAML::Value << YAML::Flow << YAML::BeginSeq
        << format_number(t.coefficient.real()) << format_number(t.coefficient.imag()) << YAML::EndSeq;
    if (t.kind == StateTermConfig::Kind::gaussian) {
      out << YAML::Key << "kind" << YAML::Value << "gaussian";
      out << YAML::Key << "center" << YAML::Value;
      emit_vec(out, t.center, d);
      out << YAML::Key << "width" << YAML::Value;
      emit_vec(out, t.width, d);
      out << YAML::Key << "momentum" << YAML::Value;
      emit_vec(out, t.momentum, d);
    } else {
      out << YAML::Key << "kind" << YAML::Value << "eigenstate";
      out << YAML::Key << "quanta" << YAML::Value << YAML::Flow << YAML::BeginSeq;
      for (int a = 0; a < d; ++a) out << t.quanta[static_cast<std::size_t>(a)];
      out << YAML::EndSeq;
      out << YAML::Key << "omega" << YAML::Value;
      emit_pair(out, t.omega.value_or(c.potential.omega), d);
      out << YAML::Key << "match_integrator" << YAML::Value << t.match_integrator;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "spin" << YAML::Value;
  emit_vec(out, c.spin, 3);

  out << YAML::Key << "evolution" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "duration" << YAML::Value << format_number(c.evolution.duration);
  out << YAML::Key << "dt" << YAML::Value << format_number(c.evolution.dt);
  out << YAML::Key << "frame_stride" << YAML::Value << c.evolution.frame_stride << YAML::EndMap;

  out << YAML::Key << "hydro" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "backend" << YAML::Value << to_string(c.hydro.backend);
  out << YAML::Key << "node_epsilon" << YAML::Value << format_number(c.hydro.node_epsilon) << YAML::EndMap;

  const auto& t = c.trajectories;
  out << YAML::Key << "trajectories" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "enabled" << YAML::Value << t.enabled;
  out << YAML::Key << "dt" << YAML::Value << format_number(t.dt);
  out << YAML::Key << "mode" << YAML::Value << to_string(t.mode);
  out << YAML::Key << "nodal_hold_steps" << YAML::Value << t.nodal_hold_steps;
  out << YAML::Key << "seeds" << YAML::Value << YAML::BeginSeq;
  for (const auto& x : t.seeds) emit_vec(out, x, d);
  out << YAML::EndSeq;
  out << YAML::Key << "splits" << YAML::Value << YAML::BeginSeq;
  for (const auto& p : t.splits) {
    out << YAML::BeginMap;
    for (const auto& [key, sp] : {std::pair<const char*, const SplitSpec*>{"a", &p.a}, {"b", &p.b}}) {
      out << YAML::Key << key << YAML::Value << YAML::BeginMap;
      out << YAML::Key << "external" << YAML::Value;
      emit_vec(out, sp->x_ext0, d);
      out << YAML::Key << "internal" << YAML::Value;
      emit_vec(out, sp->x_int0, d);
      out << YAML::EndMap;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;

  const auto& e = c.ensemble;
  out << YAML::Key << "ensemble" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "enabled" << YAML::Value << e.enabled;
  out << YAML::Key << "n" << YAML::Value << e.n;
  out << YAML::Key << "seed" << YAML::Value << e.seed;
  out << YAML::Key << "bins" << YAML::Value << (e.bins > 0 ? e.bins : default_bins(e.n));
  out << YAML::Key << "modes" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (auto m : e.modes) out << to_string(m);
  out << YAML::EndSeq;
  out << YAML::Key << "dt" << YAML::Value << format_number(e.dt);
  out << YAML::Key << "record_every" << YAML::Value << e.record_every;
  out << YAML::Key << "dump_trajectories" << YAML::Value << e.dump_trajectories << YAML::EndMap;

  const auto& g = c.diagnostics;
  out << YAML::Key << "diagnostics" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "sample_frames" << YAML::Value << g.sample_frames;
  out << YAML::Key << "invariance_scale" << YAML::Value << format_number(g.invariance_scale);
  out << YAML::Key << "invariance_phase" << YAML::Value << format_number(g.invariance_phase);
  if (g.centroid_time) out << YAML::Key << "centroid_time" << YAML::Value << format_number(*g.centroid_time);
  for (const auto& [name, tol] : DiagnosticsConfig::catalogue()) {
    const auto& s = g.get(name);
    out << YAML::Key << name << YAML::Value << YAML::Flow << YAML::BeginMap;
    if (s.enabled) out << YAML::Key << "enabled" << YAML::Value << *s.enabled;
    out << YAML::Key << "tolerance" << YAML::Value << format_number(s.tolerance) << YAML::EndMap;
  }
  out << YAML::EndMap;

  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  if (include_output_dir) out << YAML::Key << "directory" << YAML::Value << c.output.directory.string();
  out << YAML::Key << "hydro_frames" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (int f : c.output.hydro_frames) out << f;
  out << YAML::EndSeq << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace

ConfigError::ConfigError(std::string key_path, int line, const std::string& message)
    : FormatError(key_path + (line > 0 ? " (line " + std::to_string(line) + ")" : std::string()) + ": " + message),
      key_path_(std::move(key_path)),
      line_(line) {}

const std::vector<std::pair<std::string, Real>>& DiagnosticsConfig::catalogue() {
  static const std::vector<std::pair<std::string, Real>> names{
      {"unitarity", 1e-10L},
      {"energy", 1e-8L},
      {"dual_path_q", 1e-8L},
      {"irrotationality", 1e-8L},
      {"spin_norm", 1e-12L},
      {"osmotic_alignment", 1e-12L},
      {"drift_internal_alignment", 1e-12L},
      {"kinetic_identity", 1e-12L},
      {"kinetic_expansion", 1e-10L},
      {"cross_scalar", 1e-8L},
      {"cross_vector", 1e-8L},
      {"cross_vector_real_part", 1e-8L},
      {"invariance", 1e-12L},
      {"continuity", 1e-4L},
      {"current_transparency", 1e-12L},
      {"hamilton_jacobi", 1e-4L},
      {"phase_path_consistency", 1e-6L},
      {"free_gaussian_l2", 1e-8L},
      {"free_gaussian_velocity", 1e-6L},
      {"free_gaussian_phase", 1e-6L},
      {"centroid", 1e-2L},
      {"harmonic_drift", 1e-10L},
      {"harmonic_osmotic", 1e-8L},
      {"harmonic_q0", 1e-6L},
      {"stationarity", 1e-8L},
      {"eigenphase_rate", 1e-6L},
      {"split_ambiguity", 1e-12L},
      {"trajectory_sum", 1e-9L},
      {"perpendicularity", 1e-10L},
      {"trapped_fraction", 0.0L},
      {"equivariance", 3e-2L},
  };
  return names;
}

const DiagnosticSetting& DiagnosticsConfig::get(const std::string& name) const {
  if (auto it = settings.find(name); it != settings.end()) {
    return it->second;
  }
  throw PreconditionError("unknown diagnostic '" + name + "'");
}

ScenarioConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("<root>", e.mark.line + 1, e.msg);
  }
  if (!root || root.IsNull()) {
    throw ConfigError("<root>", 0, "empty configuration");
  }
  const Section s(root, "");
  s.allow({"name", "description", "grid", "mass", "potential", "state", "spin", "evolution", "hydro",
           "trajectories", "ensemble", "diagnostics", "output"});
  ScenarioConfig c;
  for (const auto& [name, tol] : DiagnosticsConfig::catalogue()) {
    c.diagnostics.settings[name] = DiagnosticSetting{std::nullopt, tol};
  }
  c.name = s.get<std::string>("name", c.name);
  c.description = s.get<std::string>("description", "");
  parse_grid(s.child("grid"), c);
  c.mass = s.get<Real>("mass", c.mass);
  if (!(c.mass > 0)) fail("mass", s.raw("mass"), "mass must be positive");
  parse_potential(s.child("potential"), c);
  if (!s.has("state")) throw ConfigError("state", line_of(root), "missing required key");
  parse_state(s.raw("state"), "state", c);
  if (s.has("spin")) {
    const Vec3 raw = read_vec(s.raw("spin"), "spin", 3);
    if (!(spin_norm_violation(raw) <= kSpinAcceptance)) {
      fail("spin", s.raw("spin"),
           "spin vector not unit norm (|s^2 - 1| = " + format_number(spin_norm_violation(raw)) + ")");
    }
    c.spin = SpinVector::normalized(raw).value();
  }
  if (!s.has("evolution")) throw ConfigError("evolution", line_of(root), "missing required key");
  parse_evolution(s.child("evolution"), c);
  parse_hydro(s.child("hydro"), c);
  c.trajectories.dt = c.evolution.dt * c.evolution.frame_stride;
  c.ensemble.dt = c.trajectories.dt;
  parse_trajectories(s.child("trajectories"), c);
  parse_ensemble(s.child("ensemble"), c);
  parse_diagnostics(s.child("diagnostics"), c);
  parse_output(s.child("output"), c);
  check_static_guards(root, c);
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("<file>", 0, "cannot read " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string describe(const ScenarioConfig& config, bool include_output_dir) {
  return render(config, include_output_dir);
}

std::uint64_t config_hash(const ScenarioConfig& config) {
  // The output directory is where results go, not what they are.
  const std::string text = render(config, false);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t hash) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[hash & 0xF];
    hash >>= 4;
  }
  return out;
}

Grid build_grid(const ScenarioConfig& c) { return make_grid(c.grid.dims, c.grid.n, c.grid.extent); }

Potential build_potential(const ScenarioConfig& c, const Grid& grid) {
  switch (c.potential.kind) {
    case PotentialKind::free:
      return Potential::free(grid);
    case PotentialKind::harmonic:
      return Potential::harmonic(grid, c.mass, c.potential.omega);
    case PotentialKind::barrier:
      return Potential::barrier(grid, c.potential.height, c.potential.center, c.potential.width);
    case PotentialKind::tabulated:
      return Potential::tabulated(ScalarField(grid, c.potential.values));
  }
  throw PreconditionError("unknown potential kind");
}

StateSpec build_state(const ScenarioConfig& c) {
  StateSpec spec;
  for (const auto& t : c.state) {
    if (t.kind == StateTermConfig::Kind::gaussian) {
      spec.terms.push_back({t.coefficient, GaussianPacket{t.center, t.width, t.momentum}});
    } else {
      HarmonicEigenstate h;
      h.quanta = t.quanta;
      h.omega = t.omega.value_or(c.potential.omega);
      h.mass = c.mass;
      h.integrator_dt = t.match_integrator ? c.evolution.dt : 0;
      spec.terms.push_back({t.coefficient, h});
    }
  }
  return spec;
}

}  // namespace spinhydro::harness
