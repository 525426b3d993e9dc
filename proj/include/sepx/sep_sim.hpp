#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "sepx/limit_theory.hpp"
#include "sepx/profiles.hpp"
#include "sepx/rng.hpp"
#include "sepx/walk_kernel.hpp"

namespace sepx {

enum class Coupling { suppressed, stirring, free };

const char* coupling_name(Coupling c);
Coupling parse_coupling(const std::string& s);

struct SiteSnapshot {
  long lo = 0;  // window [lo, hi]
  long hi = -1;
  std::vector<std::uint8_t> occupancy;
  double t = 0.0;

  long count() const;
  bool at(long x) const { return occupancy[static_cast<std::size_t>(x - lo)] != 0; }
};

struct ObservableSample {
  long x_t = 0;
  std::vector<long> order_stats;              // X^(0) > X^(1) > ...
  std::vector<std::pair<double, long>> n_t;   // (z, N_t(z))
  std::uint64_t seed = 0;
  double t = 0.0;
  std::uint64_t events = 0;
  std::optional<SiteSnapshot> snapshot;

  long count_at(double z) const;
};

struct SimStats {
  std::uint64_t rings = 0;
  std::uint64_t moves = 0;
};

// Positions after free motion; duplicates allowed, sorted ascending.
struct FreeConfiguration {
  std::vector<long> positions;
  double time = 0.0;
  long count_above(double z) const;
};

struct LabeledRun {
  Configuration config;
  std::vector<long> initial;    // label -> initial site
  std::vector<long> positions;  // label -> xi_i(t)
};

struct EngineLimits {
  long max_window = 1L << 26;
};

Configuration evolve_suppressed(Configuration config, const JumpKernel& kernel, double t_end, Stream& rng,
                                SimStats* stats = nullptr, const EngineLimits& lim = {});
Configuration evolve_stirring(Configuration config, const JumpKernel& kernel, double t_end, Stream& rng,
                              SimStats* stats = nullptr, const EngineLimits& lim = {});
LabeledRun evolve_stirring_labeled(const Configuration& config, const JumpKernel& kernel, double t_end, Stream& rng,
                                   const EngineLimits& lim = {});
FreeConfiguration evolve_free(const Configuration& config, const JumpKernel& kernel, double t_end, Stream& rng);

SiteSnapshot snapshot_of(const Configuration& config, long lo, long hi);

// Full step with the jammed region below -range kept implicit.
Configuration full_step_reservoir(const JumpKernel& kernel);

struct ReplicateOptions {
  double cut_eps = 1e-6;
  std::optional<long> cut;  // overrides required_left_cut
  bool reservoir = true;    // exact jammed reservoir for full-step exclusion runs
  int workers = 1;
  std::optional<std::pair<long, long>> snapshot_window;
  EngineLimits limits;
};

struct ReplicatePlan {
  long cut = 0;
  bool reservoir = false;
};

ReplicatePlan plan_replicates(const StepProfile& profile, const JumpKernel& kernel, double t,
                              const std::vector<double>& z_list, Coupling coupling, const ReplicateOptions& opt);

std::vector<ObservableSample> run_replicates(const StepProfile& profile, const JumpKernel& kernel, double t,
                                             const std::vector<double>& z_list, int m_max, long n,
                                             std::uint64_t base_seed, Coupling coupling,
                                             const ReplicateOptions& opt = {});

double scaled_position(long x_t, const ScalingPair& scaling, double sigma);

}  // namespace sepx
