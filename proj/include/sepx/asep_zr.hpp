#pragma once

#include <cstdint>
#include <ostream>
#include <utility>
#include <vector>

#include "sepx/rng.hpp"

namespace sepx {

// Spacings of nearest-neighbour ASEP as a zero-range process on {1, 2, ...}
// with an infinite well at 0.
struct ZrConfig {
  std::vector<long> occupancy;  // occupancy[x - 1] = zeta(x)
  double time = 0.0;

  long at(long x) const {
    return x >= 1 && x <= static_cast<long>(occupancy.size()) ? occupancy[static_cast<std::size_t>(x - 1)] : 0;
  }
  void set(long x, long v);
  long total() const;
};

struct AsepParams {
  double p = 0.3;
  double q = 0.7;
  double ratio() const { return p / q; }
};

// p in [0, 1/2)
AsepParams make_asep_params(double p);

ZrConfig evolve_zr(ZrConfig config, const AsepParams& params, double t_end, Stream& rng);

long tagged_displacement(const ZrConfig& config);

struct SumPmf {
  std::vector<double> pmf;  // P(sum = k), k = 0..size-1
  double eps = 0.0;         // total mass unaccounted for
  long x_max = 0;
  double ratio = 0.0;

  double mean() const;
  double at(long k) const { return k >= 0 && k < static_cast<long>(pmf.size()) ? pmf[static_cast<std::size_t>(k)] : 0.0; }
  void write_csv(std::ostream& os) const;
};

// smallest X with sum_{x > X} r^x / (1 - r^x) < tol
long default_x_max(double r, double tol = 1e-6);
// sum_{x >= 1} r^x / (1 - r^x)
double mu_sum_mean(double r);

SumPmf mu_sum_distribution(double r, double eps = 1e-10);

ZrConfig sample_mu(double r, long x_max, Stream& rng);

std::pair<ZrConfig, ZrConfig> coupled_evolve(ZrConfig lower, ZrConfig upper, const AsepParams& params, double t_end,
                                             Stream& rng, bool check_each_event = false);

bool dominated(const ZrConfig& lower, const ZrConfig& upper);

}  // namespace sepx
