#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sepx/sep_sim.hpp"

namespace sepx {

struct EmpiricalDist {
  std::vector<double> values;  // sorted
  std::optional<std::vector<double>> weights;

  long n() const { return static_cast<long>(values.size()); }
  // F(x) = fraction of values <= x
  double cdf(double x) const;
  double cdf_below(double x) const;
};

EmpiricalDist make_empirical(std::vector<double> values);
EmpiricalDist make_empirical(const std::vector<long>& values);

enum class TestMethod { dkw, ks_two_sample, dispersion_bootstrap, poisson_tv, covariance_sum, trend_strict, trend_ratio };

const char* method_name(TestMethod m);

struct TestReport {
  std::string name;
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
  long n = 0;
  TestMethod method = TestMethod::dkw;
  double confidence = 0.99;
  std::string note;
};

std::string to_json(const TestReport& r);

using Cdf = std::function<double(double)>;

double ks_distance(const EmpiricalDist& emp, const Cdf& cdf);
double dkw_band(long n, double alpha = 0.01);
TestReport dkw_report(const EmpiricalDist& emp, const Cdf& cdf, double alpha = 0.01);

double ks_two_sample(const EmpiricalDist& a, const EmpiricalDist& b);
// asymptotic critical value sqrt(-log(alpha/2)/2) sqrt((n+m)/(nm))
double ks_two_sample_critical(long n, long m, double alpha = 0.01);
TestReport ks_two_sample_report(const EmpiricalDist& a, const EmpiricalDist& b, double alpha = 0.01);

struct BootstrapOptions {
  int resamples = 1000;
  std::uint64_t seed = 0x5eedULL;
  double confidence = 0.99;
};

// statistic = Var - mean, threshold = bootstrap margin; pass iff Var <= mean is not rejected
TestReport dispersion_report(const std::vector<long>& counts, const BootstrapOptions& opt = {});

double pmf_tv(const std::vector<long>& counts, const std::vector<double>& pmf);
// TV to a reference pmf with a 99% parametric-bootstrap threshold
TestReport pmf_fit(const std::vector<long>& counts, const std::vector<double>& pmf, const BootstrapOptions& opt = {});

double poisson_tv(const std::vector<long>& counts, double lambda);
TestReport poisson_fit(const std::vector<long>& counts, double lambda, const BootstrapOptions& opt = {});

struct CovSumEstimate {
  double value = 0.0;  // -sum_{j != k > z} Cov(eta(j), eta(k))
  double ci_low = 0.0;
  double ci_high = 0.0;
  long n = 0;
};

CovSumEstimate empirical_cov_sum(const std::vector<SiteSnapshot>& snapshots, double z, const BootstrapOptions& opt = {});

enum class TrendMode { strict_decrease, bounded_ratio };

TestReport trend_report(const std::vector<std::pair<double, double>>& values, TrendMode mode = TrendMode::strict_decrease,
                        double factor = 5.0);

double quantile(std::vector<double> v, double q);

}  // namespace sepx
