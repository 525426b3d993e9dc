#include "sepx/limit_theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "sepx/error.hpp"

namespace sepx {

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::full: return "full";
    case Regime::L_fast: return "L_fast";
    case Regime::L_slow: return "L_slow";
  }
  return "?";
}

ScalingPair scaling_full(double t) {
  if (!(t > std::numbers::e)) throw Error(Errc::TimeTooSmall, "full scaling needs t > e");
  double lt = std::log(t);
  ScalingPair s;
  s.a = std::log(t / (std::sqrt(2.0 * std::numbers::pi) * lt));
  s.b = std::sqrt(t / lt);
  s.t = t;
  return s;
}

ScalingPair scaling_L(double t, long L) {
  if (L < 2) throw Error(Errc::LTooSmall, "L-slow scaling needs L >= 2");
  if (!(t > 0.0)) throw Error(Errc::TimeTooSmall, "t must be > 0");
  double l2 = 2.0 * std::log(static_cast<double>(L));
  ScalingPair s;
  s.a = std::log(static_cast<double>(L) * static_cast<double>(L) / std::sqrt(2.0 * std::numbers::pi * l2));
  s.b = std::sqrt(t / l2);
  s.regime = Regime::L_slow;
  s.t = t;
  s.L = L;
  return s;
}

ScalingPair scaling_L_fast(double t, long L) {
  if (L < 1) throw Error(Errc::LTooSmall, "L must be >= 1");
  ScalingPair s = scaling_full(t);
  s.regime = Regime::L_fast;
  s.L = L;
  s.c = static_cast<double>(L) * std::sqrt(std::log(t) / t);
  return s;
}

double threshold(const ScalingPair& s, double sigma, double x) { return sigma * s.b * (x + s.a); }

double LimitLaw::lambda(double x) const { return coefficient * std::exp(-x); }
double LimitLaw::cdf(double x) const { return std::exp(-lambda(x)); }

LimitLaw limit_law(Regime regime, double sigma, double rho_bar, std::optional<double> c) {
  if (!(sigma > 0.0)) throw Error(Errc::InvalidArgument, "sigma must be > 0");
  if (!(rho_bar > 0.0 && rho_bar <= 1.0)) throw Error(Errc::InvalidArgument, "rho_bar must lie in (0, 1]");
  LimitLaw law;
  law.regime = regime;
  law.sigma = sigma;
  law.rho_bar = rho_bar;
  law.c = c;
  switch (regime) {
    case Regime::full: law.coefficient = sigma * rho_bar; break;
    case Regime::L_fast:
      if (!c) throw Error(Errc::MissingC, "L_fast law needs c");
      if (!(*c > 0.0)) throw Error(Errc::InvalidArgument, "c must be > 0");
      law.coefficient = std::isinf(*c) ? sigma * rho_bar : sigma * rho_bar * (-std::expm1(-*c / sigma));
      break;
    case Regime::L_slow: law.coefficient = rho_bar; break;
  }
  return law;
}

double order_stat_limit_cdf(int m, double x, const LimitLaw& law) {
  if (m < 0) throw Error(Errc::InvalidArgument, "m must be >= 0");
  double lam = law.lambda(x);
  double term = std::exp(-lam), s = term;
  for (int k = 1; k <= m; ++k) {
    term *= lam / k;
    s += term;
  }
  return std::min(1.0, s);
}

double expected_count(const StepProfile& profile, const JumpKernel& kernel, double t, double z, double eps) {
  if (!(t >= 0.0)) throw Error(Errc::TimeNegative, "time must be >= 0");
  const long m = profile.period();
  if (t == 0.0) {
    double s = 0.0;
    long lo = static_cast<long>(std::floor(z)) + 1;
    long far = profile.l_cut ? -*profile.l_cut : lo;
    for (long i = std::max(lo, far); i <= 0; ++i) s += profile.density(i);
    return s;
  }
  long b = static_cast<long>(std::floor(z)) + 1;
  // site 0, then residue class j: sites -j - l m with l >= 0 (and j + l m <= L)
  auto count_for = [&](long j) -> long {
    if (!profile.l_cut) return -1;
    long L = *profile.l_cut;
    return j > L ? 0 : (L - j) / m + 1;
  };
  double s = 0.0;
  if (t <= kTableTimeLimit) {
    auto tab = transition_pmf(kernel, t, std::max(1e-14, std::min(1e-10, eps) * 1e-3));
    s += tab.tail_from(b);
    for (long j = 1; j <= m; ++j) {
      double r = profile.densities[static_cast<std::size_t>(j - 1)];
      if (r == 0.0) continue;
      s += r * progression_tail(tab, b + j, m, count_for(j));
    }
  } else {
    s += progression_tail_inversion(kernel, t, b, 1, 1);
    for (long j = 1; j <= m; ++j) {
      double r = profile.densities[static_cast<std::size_t>(j - 1)];
      long c = count_for(j);
      if (r == 0.0 || c == 0) continue;
      s += r * progression_tail_inversion(kernel, t, b + j, m, c);
    }
  }
  return s;
}

MeanExcess mean_excess_asymptote(const ScalingPair& sc, double sigma, double rho_bar, double x) {
  if (!(sigma > 0.0)) throw Error(Errc::InvalidArgument, "sigma must be > 0");
  double z = threshold(sc, sigma, x);
  double st = sigma * std::sqrt(sc.t);
  MeanExcess me;
  double f0 = gaussian_mean_excess(z / st);
  double f1 = sc.L ? gaussian_mean_excess((static_cast<double>(*sc.L) + z) / st) : 0.0;
  me.surrogate = st * (f0 - f1);
  me.scaled_surrogate = rho_bar * me.surrogate;
  std::optional<double> c;
  if (sc.regime == Regime::L_fast) c = sc.c;
  me.limit = limit_law(sc.regime, sigma, rho_bar, c).lambda(x);
  return me;
}

namespace {

double trapezoid(const std::vector<double>& s, const std::vector<double>& g, std::size_t stride) {
  double acc = 0.0;
  std::size_t prev = 0;
  std::size_t n = s.size();
  for (std::size_t i = stride; i < n; i += stride) {
    acc += 0.5 * (s[i] - s[prev]) * (g[i] + g[prev]);
    prev = i;
  }
  if (prev != n - 1) acc += 0.5 * (s[n - 1] - s[prev]) * (g[n - 1] + g[prev]);
  return acc;
}

}  // namespace

CovarianceBound covariance_bound(const JumpKernel& kernel, double t, double z, std::optional<long> L, int nodes) {
  if (!kernel.is_finite_range) throw Error(Errc::InfiniteRangeUnsupported, "covariance bound needs a finite-range kernel");
  if (!(t >= 0.0)) throw Error(Errc::TimeNegative, "time must be >= 0");
  CovarianceBound out;
  if (t == 0.0) return out;
  if (nodes < 16) throw Error(Errc::InvalidArgument, "too few quadrature nodes");

  // log-spaced distance to the nearer endpoint, mirrored
  int half = nodes / 2;
  double umin = t * 1e-6, umax = t / 2.0;
  std::vector<double> u(static_cast<std::size_t>(half));
  for (int k = 0; k < half; ++k)
    u[static_cast<std::size_t>(k)] = umin * std::pow(umax / umin, static_cast<double>(k) / (half - 1));
  std::vector<double> s{0.0};
  for (double v : u) s.push_back(v);
  for (int k = half - 2; k >= 0; --k) s.push_back(t - u[static_cast<std::size_t>(k)]);
  s.push_back(t);

  auto tabs = transition_pmfs(kernel, s, 1e-10);
  const std::size_t n = s.size();
  std::vector<double> g(n, 0.0);
  const long Lp1 = L ? *L + 1 : 0;
  for (std::size_t idx = 0; idx < n; ++idx) {
    const PmfTable& ps = tabs[idx];
    const PmfTable& pu = tabs[n - 1 - idx];  // time t - s
    long K = ps.radius();
    long klo = L ? -K - Lp1 : -K;
    double acc = 0.0;
    for (long k = klo; k <= K; ++k) {
      double a = L ? ps(k) - ps(k + Lp1) : ps(k);
      if (a == 0.0) continue;
      double bsum = 0.0;
      for (std::size_t i = 0; i < kernel.offsets.size(); ++i) {
        double j = static_cast<double>(kernel.offsets[i]);
        double tl = pu.tail_above(z - static_cast<double>(k) - j);
        bsum += 2.0 * j * j * kernel.probs[i] * tl * tl;
      }
      acc += a * a * bsum;
    }
    g[idx] = acc;
  }
  out.value = trapezoid(s, g, 1);
  out.resolution = std::fabs(out.value - trapezoid(s, g, 2));
  out.nodes = static_cast<int>(n);
  return out;
}

double sum_of_squares_bound(double expected_count_value, double t, double z, double sigma) {
  if (t <= 0.0) return z == 0.0 ? expected_count_value : 0.0;
  return std::exp(-z * z / (2.0 * sigma * sigma * t)) * expected_count_value;
}

double mean_occupation(const StepProfile& profile, const PmfTable& table, long k) {
  long K = table.radius();
  long lo = k - K;
  if (profile.l_cut) lo = std::max(lo, -*profile.l_cut);
  double s = 0.0;
  for (long i = lo; i <= 0; ++i) {
    double r = profile.density(i);
    if (r != 0.0) s += r * table(k - i);
  }
  return s;
}

double sum_of_squares_exact(const StepProfile& profile, const PmfTable& table, double z) {
  double s = 0.0;
  for (long k = static_cast<long>(std::floor(z)) + 1; k <= table.radius(); ++k) {
    double e = mean_occupation(profile, table, k);
    s += e * e;
  }
  return s;
}

}  // namespace sepx
