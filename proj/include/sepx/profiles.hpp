#pragma once

#include <optional>
#include <vector>

#include "sepx/rng.hpp"
#include "sepx/walk_kernel.hpp"

namespace sepx {

// Periodic step densities rho_{-1..-m}; rho_0 = 1 and rho_x = 0 for x > 0.
struct StepProfile {
  std::vector<double> densities;
  std::optional<long> l_cut;
  double rho_bar = 0.0;

  long period() const { return static_cast<long>(densities.size()); }
  double density(long x) const;
  bool deterministic() const;
  // every site <= 0 occupied, no L cut
  bool is_full() const;
};

StepProfile make_profile(const std::vector<double>& densities, std::optional<long> l_cut = std::nullopt);

struct Configuration {
  std::vector<long> occupied;  // strictly increasing
  double time = 0.0;
  long left_boundary = 0;
  // sites < left_boundary are all occupied (jammed reservoir)
  bool filled_below = false;

  bool empty() const { return occupied.empty(); }
  long rightmost() const;
  long count_above(double z) const;
  // X^(0) >= X^(1) >= ... , at most depth + 1 values
  std::vector<long> top(std::size_t depth) const;
};

long required_left_cut(const StepProfile& profile, const JumpKernel& kernel, double t, double z, double eps);

Configuration sample_initial(const StepProfile& profile, long cut, Stream& rng);

}  // namespace sepx
