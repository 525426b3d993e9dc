#pragma once

#include <optional>

#include "sepx/profiles.hpp"
#include "sepx/walk_kernel.hpp"

namespace sepx {

enum class Regime { full, L_fast, L_slow };

const char* regime_name(Regime r);

struct ScalingPair {
  double a = 0.0;
  double b = 1.0;
  Regime regime = Regime::full;
  double t = 0.0;
  std::optional<long> L;
  double c = 0.0;  // L sqrt(log t / t), L_fast only
};

ScalingPair scaling_full(double t);
ScalingPair scaling_L(double t, long L);
// full-regime scaling with an L-step profile, c = L sqrt(log t / t)
ScalingPair scaling_L_fast(double t, long L);

double threshold(const ScalingPair& s, double sigma, double x);

enum class LawKind { gumbel, poisson };

struct LimitLaw {
  LawKind kind = LawKind::gumbel;
  Regime regime = Regime::full;
  double sigma = 1.0;
  double rho_bar = 1.0;
  std::optional<double> c;
  double coefficient = 1.0;  // lambda(x) = coefficient e^{-x}

  double lambda(double x) const;
  double cdf(double x) const;
};

LimitLaw limit_law(Regime regime, double sigma, double rho_bar, std::optional<double> c = std::nullopt);
double order_stat_limit_cdf(int m, double x, const LimitLaw& law);

double expected_count(const StepProfile& profile, const JumpKernel& kernel, double t, double z, double eps = 1e-10);

struct MeanExcess {
  double surrogate = 0.0;         // sigma sqrt(t) (f(w) - f(w + L/(sigma sqrt t)))
  double scaled_surrogate = 0.0;  // rho_bar * surrogate
  double limit = 0.0;
};

MeanExcess mean_excess_asymptote(const ScalingPair& s, double sigma, double rho_bar, double x);

struct CovarianceBound {
  double value = 0.0;
  double resolution = 0.0;  // |full grid - every other node|
  int nodes = 0;
};

CovarianceBound covariance_bound(const JumpKernel& kernel, double t, double z, std::optional<long> L = std::nullopt,
                                 int nodes = 512);

double sum_of_squares_bound(double expected_count_value, double t, double z, double sigma);

// E[eta_t(k)] = sum_{i<=0} rho_i P(xi_t = k - i)
double mean_occupation(const StepProfile& profile, const PmfTable& table, long k);
// sum_{k>z} E[eta_t(k)]^2
double sum_of_squares_exact(const StepProfile& profile, const PmfTable& table, double z);

}  // namespace sepx
