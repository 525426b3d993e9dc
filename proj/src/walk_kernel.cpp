#include "sepx/walk_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "sepx/error.hpp"

namespace sepx {

namespace {

using cplx = std::complex<double>;

long floor_to_long(double z) {
  if (z >= 1e15) return static_cast<long>(1e15);
  if (z <= -1e15) return static_cast<long>(-1e15);
  return static_cast<long>(std::floor(z));
}

// psi(w) - 1 = sum_j 4 p_j sinh^2(j w / 2), stable near w = 0.
double psi_minus_one(const JumpKernel& k, double l) {
  double s = 0.0;
  for (std::size_t i = 0; i < k.offsets.size(); ++i) {
    double h = std::sinh(0.5 * static_cast<double>(k.offsets[i]) * l);
    s += 4.0 * k.probs[i] * h * h;
  }
  return s;
}

cplx psi_minus_one(const JumpKernel& k, cplx w) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < k.offsets.size(); ++i) {
    cplx h = std::sinh(0.5 * static_cast<double>(k.offsets[i]) * w);
    s += 4.0 * k.probs[i] * h * h;
  }
  return s;
}

// 1 - e^{-w}
cplx one_minus_exp(cplx w) { return 2.0 * std::exp(-0.5 * w) * std::sinh(0.5 * w); }

struct PoissonWindow {
  long lo = 0;
  long hi = 0;
  std::vector<double> w;  // weights for n = lo..hi
};

PoissonWindow poisson_window(double t, double drop) {
  PoissonWindow pw;
  long nmax = static_cast<long>(std::ceil(t + 20.0 * std::sqrt(t) + 60.0));
  std::vector<double> w(static_cast<std::size_t>(nmax) + 1, 0.0);
  // recurrence outward from the mode, then normalise away the lgamma rounding
  long mode = std::min(nmax, static_cast<long>(std::floor(t)));
  std::size_t md = static_cast<std::size_t>(mode);
  w[md] = 1.0;
  for (long n = mode + 1; n <= nmax; ++n)
    w[static_cast<std::size_t>(n)] = w[static_cast<std::size_t>(n - 1)] * t / static_cast<double>(n);
  for (long n = mode; n > 0; --n)
    w[static_cast<std::size_t>(n - 1)] = w[static_cast<std::size_t>(n)] * static_cast<double>(n) / t;
  double tot = 0.0;
  for (double v : w) tot += v;
  for (double& v : w) v /= tot;
  long lo = 0;
  double acc = 0.0;
  while (lo < nmax && acc + w[static_cast<std::size_t>(lo)] <= drop) acc += w[static_cast<std::size_t>(lo++)];
  long hi = nmax;
  acc = 0.0;
  while (hi > lo && acc + w[static_cast<std::size_t>(hi)] <= drop) acc += w[static_cast<std::size_t>(hi--)];
  pw.lo = lo;
  pw.hi = hi;
  pw.w.assign(w.begin() + lo, w.begin() + hi + 1);
  return pw;
}

}  // namespace

double JumpKernel::prob(long k) const {
  long a = k < 0 ? -k : k;
  auto it = std::lower_bound(offsets.begin(), offsets.end(), a);
  if (it == offsets.end() || *it != a) return 0.0;
  return probs[static_cast<std::size_t>(it - offsets.begin())];
}

double JumpKernel::psi(double l) const { return 1.0 + psi_minus_one(*this, l); }

double JumpKernel::dpsi(double l) const {
  double s = 0.0;
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    double j = static_cast<double>(offsets[i]);
    s += 2.0 * probs[i] * j * std::sinh(j * l);
  }
  return s;
}

double JumpKernel::d2psi(double l) const {
  double s = 0.0;
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    double j = static_cast<double>(offsets[i]);
    s += 2.0 * probs[i] * j * j * std::cosh(j * l);
  }
  return s;
}

double JumpKernel::sigma() const { return std::sqrt(sigma2); }

JumpKernel build_kernel(const std::vector<OffsetProb>& offsets_probs, double theta,
                        std::optional<TailEnvelope> envelope, double tail_eps) {
  if (offsets_probs.empty()) throw Error(Errc::EmptySupport, "no offsets given");
  std::map<long, double> pos, neg;
  for (auto [o, p] : offsets_probs) {
    if (o == 0) throw Error(Errc::ZeroOffset, "offset 0 is not a jump");
    if (!std::isfinite(p) || p < 0.0) throw Error(Errc::NonNormalized, "probability must be finite and >= 0");
    (o > 0 ? pos[o] : neg[-o]) += p;
  }
  std::map<long, double> side = pos;
  for (auto [a, p] : neg) {
    auto it = side.find(a);
    if (it == side.end()) {
      side[a] = p;
    } else if (std::fabs(it->second - p) > 1e-12) {
      throw Error(Errc::AsymmetricInput, "p(" + std::to_string(a) + ") != p(-" + std::to_string(a) + ")");
    }
  }
  JumpKernel k;
  double total = 0.0;
  for (auto [a, p] : side) {
    if (p <= 0.0) continue;
    k.offsets.push_back(a);
    k.probs.push_back(p);
    total += 2.0 * p;
  }
  if (k.offsets.empty()) throw Error(Errc::EmptySupport, "all probabilities are zero");
  if (!(theta > 0.0) || !std::isfinite(theta)) throw Error(Errc::InfiniteMgf, "theta must be positive and finite");

  double slack = 1e-9;
  if (envelope) {
    const auto& e = *envelope;
    if (!(e.A > 0.0) || !(e.r > 0.0) || !(e.r < 1.0))
      throw Error(Errc::InfiniteMgf, "envelope needs A > 0 and 0 < r < 1");
    if (e.r * std::exp(theta) >= 1.0)
      throw Error(Errc::InfiniteMgf, "envelope r e^theta >= 1, exponential moment not certified");
    for (std::size_t i = 0; i < k.offsets.size(); ++i)
      if (k.probs[i] > e.A * std::pow(e.r, static_cast<double>(k.offsets[i])) * (1.0 + 1e-12))
        throw Error(Errc::InfiniteMgf, "p(" + std::to_string(k.offsets[i]) + ") exceeds envelope");
    double tail = 2.0 * e.A * std::pow(e.r, static_cast<double>(k.offsets.back() + 1)) / (1.0 - e.r);
    if (tail >= tail_eps / 10.0)
      throw Error(Errc::TruncationBudgetExceeded, "listed support too short for the envelope tail budget");
    slack += tail;
    k.is_finite_range = false;
    k.envelope = envelope;
  }
  if (std::fabs(total - 1.0) > slack) {
    std::ostringstream os;
    os << "total mass " << total;
    throw Error(Errc::NonNormalized, os.str());
  }
  for (auto& p : k.probs) p /= total;
  k.theta = theta;
  k.range = k.offsets.back();
  double s2 = 0.0;
  for (std::size_t i = 0; i < k.offsets.size(); ++i) {
    double j = static_cast<double>(k.offsets[i]);
    s2 += 2.0 * j * j * k.probs[i];
  }
  k.sigma2 = s2;
  return k;
}

JumpKernel nearest_neighbor_kernel() { return build_kernel({{1, 0.5}}, 1.0); }

PmfTable::PmfTable(double t, double eps, std::vector<double> half)
    : t_(t), eps_(eps), half_(std::move(half)) {
  suffix_.assign(half_.size() + 1, 0.0);
  for (std::size_t k = half_.size(); k-- > 0;) suffix_[k] = suffix_[k + 1] + half_[k];
}

double PmfTable::operator()(long k) const {
  long a = k < 0 ? -k : k;
  return a < static_cast<long>(half_.size()) ? half_[static_cast<std::size_t>(a)] : 0.0;
}

double PmfTable::tail_from(long k) const {
  if (k <= 0) return 1.0 - tail_from(1 - k);
  return k < static_cast<long>(half_.size()) ? suffix_[static_cast<std::size_t>(k)] : 0.0;
}

double PmfTable::tail_above(double z) const { return tail_from(floor_to_long(z) + 1); }

double PmfTable::mass() const { return half_.empty() ? 0.0 : half_[0] + 2.0 * suffix_[1]; }

std::vector<double> PmfTable::full() const {
  long K = radius();
  std::vector<double> v(static_cast<std::size_t>(2 * K + 1));
  for (long k = -K; k <= K; ++k) v[static_cast<std::size_t>(k + K)] = (*this)(k);
  return v;
}

void PmfTable::write_csv(std::ostream& os) const {
  os << "k,prob\n";
  char buf[64];
  for (long k = -radius(); k <= radius(); ++k) {
    std::snprintf(buf, sizeof buf, "%ld,%.17g\n", k, (*this)(k));
    os << buf;
  }
}

std::vector<PmfTable> transition_pmfs(const JumpKernel& kernel, const std::vector<double>& times,
                                      double eps, const PmfOptions& opt) {
  if (!(eps > 0.0 && eps < 1.0)) throw Error(Errc::InvalidArgument, "eps must lie in (0, 1)");
  if (eps < 1e-14) throw Error(Errc::TruncationBudgetExceeded, "eps below double precision floor");
  for (double t : times)
    if (!(t >= 0.0) || !std::isfinite(t)) throw Error(Errc::TimeNegative, "time must be finite and >= 0");

  const long R = kernel.range;
  struct Job {
    PoissonWindow pw;
    long K = 0;
    std::vector<double> acc;
  };
  std::vector<Job> jobs(times.size());
  long n_top = 0, K_top = 0;
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (times[j] == 0.0) continue;
    jobs[j].pw = poisson_window(times[j], eps / 4.0);
    long nh = jobs[j].pw.hi;
    // Hoeffding: P(|S_n| >= k) <= 2 exp(-k^2 / (2 n R^2))
    double hk = static_cast<double>(R) * std::sqrt(2.0 * static_cast<double>(nh) * std::log(8.0 / eps));
    long K = std::min(R * nh, static_cast<long>(std::ceil(hk)) + 1);
    if (K + 1 > opt.max_support) throw Error(Errc::TruncationBudgetExceeded, "support exceeds memory cap");
    jobs[j].K = K;
    jobs[j].acc.assign(static_cast<std::size_t>(K) + 1, 0.0);
    n_top = std::max(n_top, nh);
    K_top = std::max(K_top, K);
  }
  if (static_cast<double>(n_top) * static_cast<double>(K_top + 1) * static_cast<double>(kernel.offsets.size()) > opt.max_work)
    throw Error(Errc::TruncationBudgetExceeded, "convolution work exceeds cap");

  std::vector<double> cur(static_cast<std::size_t>(K_top) + 1, 0.0), nxt(cur.size(), 0.0);
  cur[0] = 1.0;
  long span = 0;
  auto at = [&](long x) -> double {
    if (x < 0) x = -x;
    return x <= span ? cur[static_cast<std::size_t>(x)] : 0.0;
  };
  for (long n = 0; n <= n_top; ++n) {
    for (auto& job : jobs) {
      if (job.K == 0 && job.acc.empty()) continue;
      if (n < job.pw.lo || n > job.pw.hi) continue;
      double w = job.pw.w[static_cast<std::size_t>(n - job.pw.lo)];
      long top = std::min(span, job.K);
      double* a = job.acc.data();
      const double* c = cur.data();
      for (long k = 0; k <= top; ++k) a[k] += w * c[k];
    }
    if (n == n_top) break;
    long ns = std::min(span + R, K_top);
    for (long k = 0; k <= ns; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < kernel.offsets.size(); ++i) {
        long o = kernel.offsets[i];
        s += kernel.probs[i] * (at(k - o) + at(k + o));
      }
      nxt[static_cast<std::size_t>(k)] = s;
    }
    span = ns;
    std::swap(cur, nxt);
  }

  std::vector<PmfTable> out;
  out.reserve(times.size());
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (times[j] == 0.0) {
      out.emplace_back(0.0, 0.0, std::vector<double>{1.0});
      continue;
    }
    auto& acc = jobs[j].acc;
    double mass = acc[0];
    for (std::size_t k = 1; k < acc.size(); ++k) mass += 2.0 * acc[k];
    if (mass > 1.0)
      for (auto& v : acc) v /= mass;
    double slack = 4e-16 * std::sqrt(static_cast<double>(jobs[j].pw.hi) + 1.0);
    double deficit = std::max(0.0, 1.0 - mass) + slack;
    if (deficit > eps) throw Error(Errc::TruncationBudgetExceeded, "certified error exceeds eps");
    while (acc.size() > 1 && acc.back() == 0.0) acc.pop_back();
    out.emplace_back(times[j], deficit, std::move(acc));
  }
  return out;
}

PmfTable transition_pmf(const JumpKernel& kernel, double t, double eps, const PmfOptions& opt) {
  return std::move(transition_pmfs(kernel, {t}, eps, opt).front());
}

double progression_tail(const PmfTable& table, long a, long m, long count) {
  if (m < 1) throw Error(Errc::InvalidArgument, "progression step must be >= 1");
  double s = 0.0;
  long K = table.radius();
  for (long i = 0; count < 0 || i < count; ++i) {
    long b = a + i * m;
    if (b > K) break;
    s += table.tail_from(b);
  }
  return s;
}

namespace {

// sum_{i<count} P(xi_t >= a + i m) for a >= 1, by tilted Fourier inversion.
double inversion_positive(const JumpKernel& k, double t, long a, long m, long count, double rel_tol) {
  const double da = static_cast<double>(a);
  const double poles = count < 0 ? 2.0 : 1.0;
  const double lcap = 600.0 / static_cast<double>(k.range);
  auto h = [&](double l) { return t * k.dpsi(l) - da - poles / l; };
  double lo = 1e-300, hi = 1.0 / std::sqrt(t * k.sigma2 + 1.0);
  while (h(hi) < 0.0 && hi < lcap) hi *= 2.0;
  hi = std::min(hi, lcap);
  if (h(hi) < 0.0) {
    lo = hi;
  } else {
    lo = hi / 2.0;
    while (h(lo) > 0.0 && lo > 1e-12) lo /= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      double mid = 0.5 * (lo + hi);
      (h(mid) < 0.0 ? lo : hi) = mid;
    }
  }
  const double lam = std::max(hi, 1e-12);

  auto F = [&](double s) -> double {
    cplx w(lam, s);
    cplx e = t * psi_minus_one(k, w) - w * da;
    cplx g = 1.0 / one_minus_exp(w);
    if (count < 0) {
      g /= one_minus_exp(w * static_cast<double>(m));
    } else if (count > 1) {
      g *= one_minus_exp(w * static_cast<double>(m) * static_cast<double>(count)) /
           one_minus_exp(w * static_cast<double>(m));
    }
    return std::real(std::exp(e) * g);
  };

  double log_peak = t * psi_minus_one(k, lam) - lam * da - std::log(-std::expm1(-lam));
  if (count < 0) log_peak -= std::log(-std::expm1(-lam * static_cast<double>(m)));
  double width = 1.0 / std::sqrt(t * k.d2psi(lam) + 1e-300);
  double log_val = log_peak + std::log(std::min(1.0, width));
  double n_alias = (40.0 + std::max(0.0, -log_val) + std::log1p((std::fabs(da) + 1.0) / static_cast<double>(m))) / lam;
  double n_res = 4.0 * std::numbers::pi / width;
  double want = std::max({64.0, n_alias, n_res});
  if (want > 1e8) throw Error(Errc::TruncationBudgetExceeded, "inversion grid too large");
  long N = 64;
  while (static_cast<double>(N) < want) N <<= 1;

  const double two_pi = 2.0 * std::numbers::pi;
  // F(-s) = conj F(s): sum over half the circle.
  auto full_sum = [&](long n) {
    double s = F(0.0) + F(std::numbers::pi);
    for (long j = 1; j < n / 2; ++j) s += 2.0 * F(two_pi * static_cast<double>(j) / static_cast<double>(n));
    return s / static_cast<double>(n);
  };
  double r = full_sum(N);
  for (;;) {
    double odd = 0.0;
    for (long j = 1; j < N; j += 2) odd += 2.0 * F(two_pi * static_cast<double>(j) / static_cast<double>(2 * N));
    double r2 = 0.5 * (r + odd / static_cast<double>(N));
    N *= 2;
    if (std::fabs(r2 - r) <= rel_tol * std::fabs(r2) + 1e-300) return r2;
    r = r2;
    if (N > (1L << 27)) throw Error(Errc::TruncationBudgetExceeded, "inversion did not converge");
  }
}

}  // namespace

double progression_tail_inversion(const JumpKernel& kernel, double t, long a, long m, long count,
                                  double rel_tol) {
  if (m < 1) throw Error(Errc::InvalidArgument, "progression step must be >= 1");
  if (!(t >= 0.0)) throw Error(Errc::TimeNegative, "time must be >= 0");
  if (count == 0) return 0.0;
  double s = 0.0;
  long i0 = 0;
  if (a <= 0) {
    long n0 = (-a) / m + 1;
    if (count >= 0) n0 = std::min(n0, count);
    for (long i = 0; i < n0; ++i) {
      long b = a + i * m;
      s += t == 0.0 ? 1.0 : 1.0 - inversion_positive(kernel, t, 1 - b, 1, 1, rel_tol);
    }
    i0 = n0;
  }
  if (count >= 0 && i0 >= count) return s;
  if (t == 0.0) return s;
  long c1 = count < 0 ? -1 : count - i0;
  return s + inversion_positive(kernel, t, a + i0 * m, m, c1, rel_tol);
}

double tail_prob(const JumpKernel& kernel, double t, double z, double eps) {
  if (!(t >= 0.0)) throw Error(Errc::TimeNegative, "time must be >= 0");
  if (t == 0.0) return z < 0.0 ? 1.0 : 0.0;
  if (t <= kTableTimeLimit) return transition_pmf(kernel, t, eps).tail_above(z);
  return progression_tail_inversion(kernel, t, floor_to_long(z) + 1, 1, 1, std::min(1e-12, eps));
}

double chernoff_log_tail(const JumpKernel& kernel, double t, double x) {
  if (!(t >= 0.0)) throw Error(Errc::TimeNegative, "time must be >= 0");
  if (!(x >= 0.0)) throw Error(Errc::OutOfChernoffRange, "x must be >= 0");
  if (x == 0.0) return 0.0;
  if (x > kernel.sigma2 * kernel.theta * t * (1.0 + 1e-12))
    throw Error(Errc::OutOfChernoffRange, "x exceeds sigma^2 theta t");
  double lam = x / (kernel.sigma2 * t);
  return -lam * x + t * psi_minus_one(kernel, lam);
}

double local_clt_density(const JumpKernel& kernel, double t, long x) {
  if (!(t > 0.0)) throw Error(Errc::InvalidArgument, "t must be > 0");
  double v = kernel.sigma2 * t;
  double dx = static_cast<double>(x);
  return std::exp(-dx * dx / (2.0 * v)) / std::sqrt(2.0 * std::numbers::pi * v);
}

double normal_pdf(double u) { return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi); }
double normal_sf(double u) { return 0.5 * std::erfc(u / std::numbers::sqrt2); }
double normal_cdf(double u) { return 0.5 * std::erfc(-u / std::numbers::sqrt2); }
double gaussian_mean_excess(double u) { return normal_pdf(u) - u * normal_sf(u); }

double pmf_shift_distance(const PmfTable& table, long y) {
  long K = table.radius();
  long ay = y < 0 ? -y : y;
  double s = 0.0;
  for (long x = -K - ay; x <= K + ay; ++x) s += std::fabs(table(x) - table(x + y));
  return s;
}

double pmf_shift_distance(const JumpKernel& kernel, double t, long y, double eps) {
  if (!(t > 0.0)) throw Error(Errc::InvalidArgument, "t must be > 0");
  return pmf_shift_distance(transition_pmf(kernel, t, eps), y);
}

double grad_residual_distance(const JumpKernel& kernel, const PmfTable& table, long y) {
  long K = table.radius();
  double t = table.time();
  auto delta = [&](long x) { return table(x) - local_clt_density(kernel, t, x); };
  double m = 0.0;
  for (long x = -K; x <= K; ++x) m = std::max(m, std::fabs(delta(x + y) - delta(x)));
  return m;
}

double grad_residual_distance(const JumpKernel& kernel, double t, long y, double eps) {
  if (!(t > 0.0)) throw Error(Errc::InvalidArgument, "t must be > 0");
  return grad_residual_distance(kernel, transition_pmf(kernel, t, eps), y);
}

double normal_tail_ratio_error(const JumpKernel& kernel, double t, double x_scaled, double eps) {
  if (!(x_scaled > 0.0)) throw Error(Errc::InvalidArgument, "x_scaled must be > 0");
  if (!(t > 0.0)) throw Error(Errc::InvalidArgument, "t must be > 0");
  double z = kernel.sigma() * x_scaled * std::sqrt(t);
  return std::fabs(1.0 - tail_prob(kernel, t, z, eps) / normal_sf(x_scaled));
}

std::string describe(const JumpKernel& kernel) {
  std::ostringstream os;
  os.precision(17);
  os << "{";
  for (std::size_t i = 0; i < kernel.offsets.size(); ++i)
    os << (i ? "," : "") << "\"" << kernel.offsets[i] << "\":" << kernel.probs[i];
  os << "}";
  return os.str();
}

}  // namespace sepx
