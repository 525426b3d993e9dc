#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sepx {

struct TailEnvelope {
  double A = 0.0;
  double r = 0.0;  // p_i <= A r^|i|
};

// Symmetric jump law, stored once per positive offset: p_{+j} = p_{-j} = probs[idx].
struct JumpKernel {
  std::vector<long> offsets;  // strictly increasing, >= 1
  std::vector<double> probs;
  double sigma2 = 0.0;
  double theta = 0.0;
  bool is_finite_range = true;
  long range = 0;
  std::optional<TailEnvelope> envelope;

  double prob(long k) const;
  // psi(l) = sum_i p_i e^{l i}
  double psi(double l) const;
  double dpsi(double l) const;
  double d2psi(double l) const;
  double sigma() const;
};

using OffsetProb = std::pair<long, double>;

// Caller supplies one side; negative offsets are mirrored and must agree.
JumpKernel build_kernel(const std::vector<OffsetProb>& offsets_probs, double theta,
                        std::optional<TailEnvelope> envelope = std::nullopt,
                        double tail_eps = 1e-10);
JumpKernel nearest_neighbor_kernel();

struct PmfOptions {
  long max_support = 1L << 24;
  double max_work = 4e11;
};

class PmfTable {
 public:
  PmfTable() = default;
  PmfTable(double t, double eps, std::vector<double> half);

  double time() const { return t_; }
  double eps() const { return eps_; }
  long radius() const { return static_cast<long>(half_.size()) - 1; }
  double operator()(long k) const;
  // P(xi >= k)
  double tail_from(long k) const;
  // P(xi > z) for real z
  double tail_above(double z) const;
  double mass() const;
  std::span<const double> half() const { return half_; }
  std::vector<double> full() const;  // index k + radius()
  void write_csv(std::ostream& os) const;

 private:
  double t_ = 0.0;
  double eps_ = 0.0;
  std::vector<double> half_;    // values for k = 0..K
  std::vector<double> suffix_;  // suffix_[k] = sum_{j>=k} values, k = 0..K+1
};

PmfTable transition_pmf(const JumpKernel& kernel, double t, double eps, const PmfOptions& opt = {});
// One Poissonization pass shared by all times.
std::vector<PmfTable> transition_pmfs(const JumpKernel& kernel, const std::vector<double>& times,
                                      double eps, const PmfOptions& opt = {});

inline constexpr double kTableTimeLimit = 2.0e4;

double tail_prob(const JumpKernel& kernel, double t, double z, double eps);

// sum_{i=0}^{count-1} P(xi_t >= a + i m); count < 0 means unbounded.
double progression_tail(const PmfTable& table, long a, long m, long count);
double progression_tail_inversion(const JumpKernel& kernel, double t, long a, long m, long count,
                                  double rel_tol = 1e-12);

double chernoff_log_tail(const JumpKernel& kernel, double t, double x);
double local_clt_density(const JumpKernel& kernel, double t, long x);

double normal_pdf(double u);
double normal_sf(double u);  // P(X > u)
double normal_cdf(double u);
double gaussian_mean_excess(double u);

double pmf_shift_distance(const JumpKernel& kernel, double t, long y, double eps);
double pmf_shift_distance(const PmfTable& table, long y);
double grad_residual_distance(const JumpKernel& kernel, double t, long y, double eps);
double grad_residual_distance(const JumpKernel& kernel, const PmfTable& table, long y);
double normal_tail_ratio_error(const JumpKernel& kernel, double t, double x_scaled,
                               double eps = 1e-12);

std::string describe(const JumpKernel& kernel);

}  // namespace sepx
