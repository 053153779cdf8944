#include <gtest/gtest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "spinhydro/harness/config.hpp"
#include "spinhydro/harness/runner.hpp"

namespace {

using namespace spinhydro;
using namespace spinhydro::harness;
namespace fs = std::filesystem;
using json = nlohmann::json;

const char* kMinimal = R"(name: tiny
grid: {dims: 1, n: 256, extent: 40}
state:
  - kind: gaussian
    center: [0]
    width: [1]
    momentum: [1]
evolution: {duration: 1}
)";

std::string with(const std::string& extra) { return std::string(kMinimal) + extra; }

fs::path temp_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("spinhydro_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Config, MinimalFillsDefaults) {
  const auto c = parse_config(kMinimal);
  EXPECT_EQ(c.name, "tiny");
  EXPECT_EQ(c.mass, 1);
  EXPECT_EQ(c.spin, (Vec3{0, 0, 1}));
  EXPECT_EQ(c.evolution.dt, 1e-3L);
  EXPECT_EQ(c.evolution.frame_stride, 10);
  EXPECT_EQ(c.hydro.backend, Backend::spectral);
  EXPECT_EQ(c.hydro.node_epsilon, 1e-12L);
  EXPECT_EQ(c.potential.kind, PotentialKind::free);
  EXPECT_TRUE(c.trajectories.enabled);
  EXPECT_EQ(c.trajectories.dt, 0.01L);
  EXPECT_FALSE(c.ensemble.enabled);
  EXPECT_EQ(c.diagnostics.get("dual_path_q").tolerance, 1e-8L);
  EXPECT_FALSE(c.diagnostics.get("dual_path_q").enabled.has_value());
  ASSERT_EQ(c.state.size(), 1u);
  EXPECT_EQ(c.state[0].momentum.x, 1);
}

TEST(Config, SpinNotUnitNamesKey) {
  try {
    parse_config(with("spin: [0, 0, 2]\n"));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key_path(), "spin");
    EXPECT_NE(std::string(e.what()).find("spin vector not unit norm"), std::string::npos) << e.what();
    EXPECT_EQ(e.line(), 9);
  }
}

TEST(Config, SpinWithinToleranceIsRenormalized) {
  const auto c = parse_config(with("spin: [0, 0.6, 0.8000001]\n"));
  EXPECT_NEAR(double(norm(c.spin)), 1.0, 1e-15);
}

TEST(Config, UnknownKeyNamed) {
  try {
    parse_config(with("trajectories:\n  velocityy: 3\n"));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("velocityy"), std::string::npos) << e.what();
    EXPECT_EQ(e.key_path(), "trajectories.velocityy");
    EXPECT_EQ(e.line(), 10);
  }
}

TEST(Config, GuardViolations) {
  auto bad = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return std::string(e.key_path());
    }
    return std::string("<none>");
  };
  std::string base = kMinimal;
  auto replace = [&](const std::string& a, const std::string& b) {
    std::string s = base;
    s.replace(s.find(a), a.size(), b);
    return s;
  };
  EXPECT_EQ(bad(replace("n: 256", "n: 100")), "grid.n");
  EXPECT_EQ(bad(replace("duration: 1", "duration: 1.0005")), "evolution.duration");
  EXPECT_EQ(bad(replace("width: [1]", "width: [0.1]")), "state");
  EXPECT_EQ(bad(with("mass: -1\n")), "mass");
  EXPECT_EQ(bad(with("hydro: {backend: fd4}\n")), "hydro.backend");
  EXPECT_EQ(bad(with("ensemble: {enabled: true, n: 10}\n")), "ensemble.n");
  EXPECT_EQ(bad(with("trajectories: {seeds: [[50]]}\n")), "trajectories.seeds");
  EXPECT_EQ(bad(with("diagnostics: {dual_path_qq: {tolerance: 1}}\n")), "diagnostics.dual_path_qq");
  EXPECT_EQ(bad("grid: [1, 2\n"), "<root>");
}

TEST(Config, DescribeRoundTrips) {
  for (const auto& entry : fs::directory_iterator(SPINHYDRO_SCENARIO_DIR)) {
    const auto c = load_config(entry.path());
    const auto again = parse_config(describe(c));
    EXPECT_EQ(describe(again), describe(c)) << entry.path();
    EXPECT_EQ(config_hash(again), config_hash(c));
  }
}

TEST(Config, HashIgnoresOutputDirectory) {
  auto a = parse_config(kMinimal);
  auto b = a;
  b.output.directory = "elsewhere";
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.evolution.duration = 2;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(hash_hex(0xabcULL), "0000000000000abc");
}

TEST(Config, AllBundledScenariosParse) {
  std::set<std::string> names;
  for (const auto& entry : fs::directory_iterator(SPINHYDRO_SCENARIO_DIR)) {
    const auto c = load_config(entry.path());
    EXPECT_FALSE(c.description.empty()) << entry.path();
    names.insert(c.name);
  }
  const std::set<std::string> want{"harmonic-ground", "harmonic-superposition-01", "free-gaussian", "moving-gaussian",
                                   "barrier-scatter", "two-packet-superposition", "2d-gaussian-oblique"};
  EXPECT_EQ(names, want);
}

const char* kSmallRun = R"(name: small
grid: {dims: 1, n: 256, extent: 40}
state:
  - kind: gaussian
    center: [0]
    width: [1]
    momentum: [1]
evolution: {duration: 1, dt: 1.0e-3, frame_stride: 10}
trajectories:
  dt: 0.01
  seeds: [[0], [1]]
  splits:
    - a: {external: [0.5], internal: [0]}
      b: {external: [0], internal: [0.5]}
ensemble: {enabled: true, n: 500, seed: 4, modes: [drift, total], record_every: 10}
output: {hydro_frames: [0, -1]}
)";

TEST(Run, WritesDocumentedOutputs) {
  const auto dir = temp_dir("run");
  const auto report = run_scenario(parse_config(kSmallRun), {dir, 2, false});
  EXPECT_TRUE(report.passed());
  for (const char* f : {"frames.bin", "frames.json", "config.yaml", "hydro_0000.csv", "hydro_0100.csv", "residuals.json",
                        "trajectory_00.csv", "trajectory_01.csv", "ensemble_drift.json", "ensemble_total.json",
                        "report.json", "run_meta.json"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  const auto rep = json::parse(slurp(dir / "report.json"));
  EXPECT_EQ(rep.at("config_hash").get<std::string>(), report.config_hash);
  EXPECT_TRUE(rep.at("passed").get<bool>());
  const auto ens = json::parse(slurp(dir / "ensemble_total.json"));
  EXPECT_EQ(ens.at("n").get<int>(), 500);
  EXPECT_EQ(ens.at("seed").get<int>(), 4);
  EXPECT_EQ(ens.at("trapped_count").get<int>(), 0);
  EXPECT_EQ(ens.at("config_hash").get<std::string>(), report.config_hash);
  ASSERT_NE(report.find("dual_path_q"), nullptr);
  EXPECT_TRUE(report.find("dual_path_q")->asserted);
  ASSERT_NE(report.find("split_ambiguity"), nullptr);
  EXPECT_LT(report.find("split_ambiguity")->value, 1e-12L);
  // Timestamps live only in run_meta.json.
  EXPECT_EQ(slurp(dir / "report.json").find("timestamp"), std::string::npos);
}

TEST(Run, HydroCsvHasOneRowPerPoint) {
  const auto dir = temp_dir("csv");
  run_scenario(parse_config(kSmallRun), {dir, 1, false});
  std::ifstream in(dir / "hydro_0000.csv");
  std::string header, line;
  std::getline(in, header);
  EXPECT_EQ(header.rfind("x,rho,", 0), 0u) << header;
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 256);
}

TEST(Run, SupportLeakWritesErrorReport) {
  const auto dir = temp_dir("leak");
  std::string text = kSmallRun;
  text.replace(text.find("momentum: [1]"), 13, "momentum: [6]");
  text.replace(text.find("duration: 1,"), 12, "duration: 4,");
  EXPECT_THROW(run_scenario(parse_config(text), {dir, 1, false}), SupportLeakError);
  const auto err = json::parse(slurp(dir / "error.json"));
  EXPECT_EQ(err.at("category").get<std::string>(), "support_leak");
}

TEST(Run, ExplicitlyEnabledButInapplicableFails) {
  const auto dir = temp_dir("inapplicable");
  const auto report =
      run_scenario(parse_config(with("diagnostics: {harmonic_q0: {enabled: true}}\n")), {dir, 1, true});
  ASSERT_NE(report.find("harmonic_q0"), nullptr);
  EXPECT_FALSE(report.passed());
}

TEST(Run, DeterministicAcrossWorkerCounts) {
  const auto a = temp_dir("det_a"), b = temp_dir("det_b");
  const auto c = parse_config(kSmallRun);
  run_scenario(c, {a, 1, false});
  run_scenario(c, {b, 4, false});
  for (const auto& entry : fs::directory_iterator(a)) {
    const auto name = entry.path().filename();
    if (name == "run_meta.json") continue;
    EXPECT_EQ(slurp(entry.path()), slurp(b / name)) << name;
  }
}

TEST(Plots, HarmonicProfileAndTraces) {
  const auto dir = temp_dir("plots");
  auto c = load_config(fs::path(SPINHYDRO_SCENARIO_DIR) / "harmonic-ground.yaml");
  c.evolution.duration = 1;
  c.evolution.frame_stride = 100;
  c.ensemble.n = 200;
  run_scenario(c, {dir, 4, false});
  const auto files = emit_plots(dir);
  EXPECT_FALSE(files.empty());

  std::ifstream prof(dir / "plots" / "profile_0000.dat");
  ASSERT_TRUE(prof);
  std::string line;
  bool found = false;
  while (std::getline(prof, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    double x, rho, qa, qk;
    ls >> x >> rho >> qa >> qk;
    if (x == 0) {
      EXPECT_NEAR(qa, 0.5, 1e-6);
      EXPECT_NEAR(qk, 0.5, 1e-6);
      found = true;
    }
  }
  EXPECT_TRUE(found);

  std::ifstream tr(dir / "plots" / "trajectory_00.dat");
  int rows = 0;
  while (std::getline(tr, line)) {
    if (!line.empty() && line[0] != '#') ++rows;
  }
  EXPECT_EQ(rows, static_cast<int>(std::lround(double(c.evolution.duration / c.trajectories.dt))) + 1);

  std::ifstream tv(dir / "plots" / "tv_total.dat");
  double prev = -1, t, v;
  int n = 0;
  while (std::getline(tv, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream(line) >> t >> v;
    EXPECT_GT(t, prev);
    prev = t;
    ++n;
  }
  EXPECT_GT(n, 1);
  EXPECT_TRUE(fs::exists(dir / "plots" / "tv.svg"));
  EXPECT_NE(slurp(dir / "plots" / "profile_0000_q.svg").find("<svg"), std::string::npos);
}

TEST(Plots, MissingOutputMessage) {
  const auto dir = temp_dir("empty");
  try {
    emit_plots(dir);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("missing output"), std::string::npos);
  }
}

#ifdef SPINHYDRO_CLI
int cli(const std::string& args) {
  const int status = std::system((std::string(SPINHYDRO_CLI) + " " + args + " > /dev/null 2>&1").c_str());
  return WEXITSTATUS(status);
}

TEST(Cli, ExitCodes) {
  const auto dir = temp_dir("cli");
  {
    std::ofstream(dir / "ok.yaml") << kSmallRun;
    std::ofstream(dir / "bad.yaml") << with("spin: [0, 0, 2]\n");
    std::ofstream(dir / "fail.yaml") << with("diagnostics: {centroid: {tolerance: 1.0e-20}}\n");
    std::string leak = kSmallRun;
    leak.replace(leak.find("momentum: [1]"), 13, "momentum: [6]");
    leak.replace(leak.find("duration: 1,"), 12, "duration: 4,");
    std::ofstream(dir / "leak.yaml") << leak;
  }
  EXPECT_EQ(cli("run " + (dir / "ok.yaml").string() + " --out " + (dir / "ok").string() + " --workers 2"), 0);
  EXPECT_EQ(cli("plot " + (dir / "ok").string()), 0);
  EXPECT_EQ(cli("check " + (dir / "ok.yaml").string()), 0);
  EXPECT_EQ(cli("describe " + (dir / "ok.yaml").string()), 0);
  EXPECT_EQ(cli("check " + (dir / "bad.yaml").string()), 2);
  EXPECT_EQ(cli("check " + (dir / "fail.yaml").string()), 1);
  EXPECT_EQ(cli("run " + (dir / "leak.yaml").string() + " --out " + (dir / "leak").string()), 3);
  EXPECT_EQ(cli("plot " + (dir / "nowhere").string()), 3);
  EXPECT_EQ(cli("frobnicate"), 2);
}
#endif

}  // namespace
