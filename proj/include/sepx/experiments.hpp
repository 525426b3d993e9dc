#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sepx/limit_theory.hpp"
#include "sepx/sep_sim.hpp"

namespace sepx {

inline constexpr int kConfigVersion = 1;

struct AsepSettings {
  double p = 0.3;
  std::vector<double> times{10.0, 50.0, 200.0};
  long replicates = 20000;
};

struct ExperimentConfig {
  std::optional<JumpKernel> kernel;
  std::optional<StepProfile> profile;
  Regime regime = Regime::full;
  std::vector<double> t_grid;
  std::vector<double> x_grid{-1.0, 0.0, 1.0, 2.0};
  long replicates = 0;
  std::uint64_t seed = 1;
  Coupling coupling = Coupling::stirring;
  int m_max = 3;
  double cut_eps = 1e-6;
  double pmf_eps = 1e-10;
  AsepSettings asep;
  std::vector<int> criteria;
  int workers = 0;  // 0 = logical cores
  std::string out_dir = "out";
  std::string canonical;  // normalized JSON text
};

// Versioned JSON config; unknown keys and invalid values raise ConfigInvalid naming the field.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
// Re-normalizes after command-line overrides.
void refresh_canonical(ExperimentConfig& cfg);

std::uint64_t config_hash(const ExperimentConfig& cfg);
std::string hex64(std::uint64_t v);

// %.17g
std::string num(double v);

ScalingPair scaling_for(const ExperimentConfig& cfg, double t);
LimitLaw law_for(const ExperimentConfig& cfg, double t);

void emit_gumbel_table(std::ostream& os, const std::vector<ObservableSample>& samples, const ScalingPair& scaling,
                       double sigma, const LimitLaw& law, const std::vector<double>& x_grid);

void write_sample_jsonl(std::ostream& os, const ObservableSample& s);

struct RunOptions {
  bool timestamp = true;
};

// Subcommands; return the process exit status.
int run_simulate(const ExperimentConfig& cfg, const RunOptions& ro);
int run_theory(const ExperimentConfig& cfg, const RunOptions& ro);
int run_sweep(const ExperimentConfig& cfg, const RunOptions& ro);
int run_asep(const ExperimentConfig& cfg, const RunOptions& ro);
int run_verify(const ExperimentConfig& cfg, const RunOptions& ro);

}  // namespace sepx
