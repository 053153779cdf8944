#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "spinhydro/csv.hpp"
#include "spinhydro/harness/config.hpp"
#include "spinhydro/harness/runner.hpp"
#include "spinhydro/parallel.hpp"

namespace {

using namespace spinhydro;
using namespace spinhydro::harness;

enum Exit { kPass = 0, kDiagnosticFailure = 1, kConfigError = 2, kRuntimeError = 3 };

void print_report(const ScenarioReport& report) {
  std::printf("scenario %s (config %s)\n", report.scenario.c_str(), report.config_hash.c_str());
  for (const auto& d : report.diagnostics) {
    const char* status = !d.asserted ? "info" : d.passed ? "PASS" : "FAIL";
    std::printf("  %-4s %-26s %-14s tol %-10s %s\n", status, d.name.c_str(), format_number(d.value).c_str(),
                format_number(d.tolerance).c_str(), d.detail.c_str());
  }
  std::printf("%s\n", report.passed() ? "all asserted diagnostics passed" : "diagnostic failure");
}

int run_or_check(const std::string& path, const std::string& out, int workers, bool identities_only) {
  ScenarioConfig config;
  try {
    config = load_config(path);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    if (!identities_only) write_error_report(std::filesystem::path(out.empty() ? "out" : out), "config", e.what());
    return kConfigError;
  }
  RunOptions options;
  options.out_dir = out;
  options.workers = workers;
  options.identities_only = identities_only;
  try {
    const auto report = run_scenario(config, options);
    print_report(report);
    return report.passed() ? kPass : kDiagnosticFailure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntimeError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spin-hydrodynamic scenario runner"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int workers = default_workers();

  auto* run = app.add_subcommand("run", "run a scenario and write all outputs");
  run->add_option("config", config_path, "scenario YAML")->required();
  run->add_option("--out", out_dir, "output directory (default: output.directory from the config)");
  run->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);

  auto* check = app.add_subcommand("check", "run identity suites only; nothing is written");
  check->add_option("config", config_path, "scenario YAML")->required();
  check->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);

  std::string plot_dir;
  auto* plot = app.add_subcommand("plot", "write plot-ready files for a finished run");
  plot->add_option("out-dir", plot_dir, "output directory of a run")->required();

  auto* describe_cmd = app.add_subcommand("describe", "print the resolved config with defaults");
  describe_cmd->add_option("config", config_path, "scenario YAML")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfigError;
  }

  if (*run) return run_or_check(config_path, out_dir, workers, false);
  if (*check) return run_or_check(config_path, {}, workers, true);
  if (*describe_cmd) {
    try {
      std::cout << describe(load_config(config_path));
      return kPass;
    } catch (const ConfigError& e) {
      std::fprintf(stderr, "config error: %s\n", e.what());
      return kConfigError;
    }
  }
  try {
    for (const auto& p : emit_plots(plot_dir)) std::cout << p.string() << "\n";
    return kPass;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntimeError;
  }
}
