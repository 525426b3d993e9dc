#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "sepx/error.hpp"
#include "sepx/experiments.hpp"

namespace {

constexpr int kConfigError = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exclusion process front simulations"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out;
  bool no_timestamp = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "JSON config file")->required();
    sub->add_option("--seed", seed, "override base seed");
    sub->add_option("--workers", workers, "worker threads (0 = all cores)");
    sub->add_option("--out", out, "output directory");
    sub->add_flag("--no-timestamp", no_timestamp, "omit generation time from outputs");
  };

  auto* simulate = app.add_subcommand("simulate", "sample front positions and counts");
  auto* theory = app.add_subcommand("theory", "tabulate expected counts and limits");
  auto* verify = app.add_subcommand("verify", "run acceptance criteria");
  auto* sweep = app.add_subcommand("sweep", "convergence sweep over t_grid");
  auto* asep = app.add_subcommand("asep", "zero-range ASEP relaxation");
  for (auto* s : {simulate, theory, verify, sweep, asep}) add_common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kConfigError;
  }

  sepx::ExperimentConfig cfg;
  try {
    cfg = sepx::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (workers) {
      if (*workers < 0) throw sepx::Error(sepx::Errc::ConfigInvalid, "--workers: must be >= 0");
      cfg.workers = *workers;
    }
    if (out) cfg.out_dir = *out;
    sepx::refresh_canonical(cfg);
  } catch (const sepx::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  sepx::RunOptions ro;
  ro.timestamp = !no_timestamp;
  try {
    if (simulate->parsed()) return sepx::run_simulate(cfg, ro);
    if (theory->parsed()) return sepx::run_theory(cfg, ro);
    if (verify->parsed()) return sepx::run_verify(cfg, ro);
    if (sweep->parsed()) return sepx::run_sweep(cfg, ro);
    if (asep->parsed()) return sepx::run_asep(cfg, ro);
  } catch (const sepx::Error& e) {
    std::cerr << sepx::errc_name(e.code()) << ": " << e.what() << "\n";
    return e.code() == sepx::Errc::ConfigInvalid ? kConfigError : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
