#include "sepx/profiles.hpp"

#include <algorithm>
#include <cmath>

#include "sepx/error.hpp"

namespace sepx {

double StepProfile::density(long x) const {
  if (x > 0) return 0.0;
  if (x == 0) return 1.0;
  if (l_cut && x < -*l_cut) return 0.0;
  long m = period();
  long j = ((-x - 1) % m) + 1;
  return densities[static_cast<std::size_t>(j - 1)];
}

bool StepProfile::deterministic() const {
  return std::all_of(densities.begin(), densities.end(), [](double r) { return r == 0.0 || r == 1.0; });
}

bool StepProfile::is_full() const {
  return !l_cut && std::all_of(densities.begin(), densities.end(), [](double r) { return r == 1.0; });
}

StepProfile make_profile(const std::vector<double>& densities, std::optional<long> l_cut) {
  if (densities.empty()) throw Error(Errc::AllZeroDensities, "no densities given");
  double s = 0.0;
  for (double r : densities) {
    if (!(r >= 0.0 && r <= 1.0)) throw Error(Errc::DensityOutOfRange, "density outside [0, 1]");
    s += r;
  }
  if (s == 0.0) throw Error(Errc::AllZeroDensities, "at least one density must be positive");
  if (l_cut && *l_cut < 0) throw Error(Errc::InvalidArgument, "L must be >= 0");
  StepProfile p;
  p.densities = densities;
  p.l_cut = l_cut;
  p.rho_bar = s / static_cast<double>(densities.size());
  return p;
}

long Configuration::rightmost() const {
  if (occupied.empty()) throw Error(Errc::InvalidArgument, "empty configuration");
  return occupied.back();
}

long Configuration::count_above(double z) const {
  double f = std::floor(z);
  auto it = std::upper_bound(occupied.begin(), occupied.end(), f,
                             [](double v, long s) { return v < static_cast<double>(s); });
  return static_cast<long>(occupied.end() - it);
}

std::vector<long> Configuration::top(std::size_t depth) const {
  std::vector<long> out;
  for (auto it = occupied.rbegin(); it != occupied.rend() && out.size() <= depth; ++it) out.push_back(*it);
  if (filled_below) {
    long next = occupied.empty() ? left_boundary - 1 : std::min(occupied.front(), left_boundary) - 1;
    while (out.size() <= depth) out.push_back(next--);
  }
  return out;
}

namespace {

// exponent l for the bound P(xi_t >= x) <= exp(t(psi(l) - 1) - l x)
double tilt_for(const JumpKernel& k, double t, double x) {
  double cap = k.is_finite_range ? 60.0 / static_cast<double>(k.range) : k.theta;
  if (t * k.dpsi(cap) <= x) return cap;
  double lo = 0.0, hi = cap;
  for (int i = 0; i < 100; ++i) {
    double mid = 0.5 * (lo + hi);
    (t * k.dpsi(mid) < x ? lo : hi) = mid;
  }
  return std::max(lo, 1e-300);
}

double log_tail_bound(const JumpKernel& k, double t, double x) {
  if (x <= k.sigma2 * k.theta * t) return chernoff_log_tail(k, t, x);
  double l = tilt_for(k, t, x);
  return t * (k.psi(l) - 1.0) - l * x;
}

}  // namespace

long required_left_cut(const StepProfile& profile, const JumpKernel& kernel, double t, double z, double eps) {
  if (!(z > 0.0) || !(t > 0.0)) throw Error(Errc::InvalidArgument, "required_left_cut needs z > 0 and t > 0");
  if (!(eps > 0.0 && eps < 1.0)) throw Error(Errc::InvalidArgument, "eps must lie in (0, 1)");
  long b = static_cast<long>(std::floor(z)) + 1;
  double sd = std::sqrt(kernel.sigma2 * t);
  long X = b + static_cast<long>(std::ceil(sd * (std::sqrt(2.0 * std::log(1.0 / eps)) + 6.0) + 2.0 * std::log(1.0 / eps))) +
           kernel.range;
  if (!kernel.is_finite_range) X = std::min(X, static_cast<long>(std::floor(kernel.sigma2 * kernel.theta * t)));
  long lo_x = b + 1;
  bool bounded = profile.l_cut && b + *profile.l_cut + 1 <= X;
  long limit = bounded ? b + *profile.l_cut + 1 : X;
  double rem = 0.0;
  if (!bounded) {
    // sum_{x > limit} P(xi >= x) <= e^{t(psi(l)-1) - l(limit+1)} / (1 - e^{-l})
    double edge = static_cast<double>(std::max(limit, lo_x - 1) + 1);
    double l = tilt_for(kernel, t, edge);
    rem = std::exp(t * (kernel.psi(l) - 1.0) - l * edge) / (-std::expm1(-l));
  }
  if (rem >= eps) throw Error(Errc::ChernoffRangeExceeded, "Chernoff window exhausted before eps budget");
  double s = rem;
  long x0 = std::max(limit + 1, lo_x);
  for (long x = limit; x >= lo_x; --x) {
    double ns = s + profile.density(b - x) * std::exp(log_tail_bound(kernel, t, static_cast<double>(x)));
    if (ns >= eps) break;
    s = ns;
    x0 = x;
  }
  long c = b + 1 - x0;
  if (profile.l_cut) c = std::max(c, -*profile.l_cut);
  return std::min(c, 0L);
}

Configuration sample_initial(const StepProfile& profile, long cut, Stream& rng) {
  if (cut > 0) throw Error(Errc::InvalidArgument, "cut must be <= 0");
  Configuration c;
  c.left_boundary = cut;
  for (long x = cut; x < 0; ++x)
    if (rng.uniform() < profile.density(x)) c.occupied.push_back(x);
  c.occupied.push_back(0);
  return c;
}

}  // namespace sepx
