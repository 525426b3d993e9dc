#include "sepx/asep_zr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "sepx/error.hpp"

namespace sepx {

void ZrConfig::set(long x, long v) {
  if (x < 1) throw Error(Errc::InvalidArgument, "zero-range sites start at 1");
  if (v < 0) throw Error(Errc::InvalidArgument, "occupancy must be >= 0");
  if (x > static_cast<long>(occupancy.size())) {
    if (v == 0) return;
    occupancy.resize(static_cast<std::size_t>(x), 0);
  }
  occupancy[static_cast<std::size_t>(x - 1)] = v;
}

long ZrConfig::total() const {
  long s = 0;
  for (long v : occupancy) s += v;
  return s;
}

AsepParams make_asep_params(double p) {
  if (!(p >= 0.0 && p < 0.5)) throw Error(Errc::RatioOutOfRange, "need 0 <= p < 1/2 so that p < q");
  return AsepParams{p, 1.0 - p};
}

namespace {

void check_params(const AsepParams& a) {
  if (!(a.p >= 0.0 && a.q > a.p) || std::fabs(a.p + a.q - 1.0) > 1e-12)
    throw Error(Errc::RatioOutOfRange, "need p + q = 1 and p < q");
}

// Several zero-range layers driven by the basic coupling. A site is
// active when any layer holds a particle there; every layer occupied at
// the chosen site makes the same move.
class Layers {
 public:
  explicit Layers(std::vector<ZrConfig*> ls) : ls_(std::move(ls)) {
    long n = 0;
    for (auto* l : ls_) n = std::max(n, static_cast<long>(l->occupancy.size()));
    for (auto* l : ls_) l->occupancy.resize(static_cast<std::size_t>(n), 0);
    where_.assign(static_cast<std::size_t>(n), -1);
    for (long x = 1; x <= n; ++x) refresh(x);
  }

  std::size_t active() const { return act_.size(); }

  void inject() { add(1); }

  void move_from(Stream& g, const AsepParams& a) {
    long x = act_[static_cast<std::size_t>(g.below(act_.size()))];
    bool right = g.uniform() < a.p;
    long y = right ? x + 1 : x - 1;
    grow(y);
    for (auto* l : ls_) {
      long& v = l->occupancy[static_cast<std::size_t>(x - 1)];
      if (v == 0) continue;
      --v;
      if (y >= 1) ++l->occupancy[static_cast<std::size_t>(y - 1)];
    }
    refresh(x);
    if (y >= 1) refresh(y);
    last_ = {x, y};
  }

  std::pair<long, long> last() const { return last_; }

 private:
  void add(long x) {
    grow(x);
    for (auto* l : ls_) ++l->occupancy[static_cast<std::size_t>(x - 1)];
    refresh(x);
    last_ = {x, x};
  }

  void grow(long x) {
    if (x <= static_cast<long>(where_.size())) return;
    std::size_t n = std::max(static_cast<std::size_t>(x), 2 * where_.size());
    for (auto* l : ls_) l->occupancy.resize(n, 0);
    where_.resize(n, -1);
  }

  void refresh(long x) {
    bool on = false;
    for (auto* l : ls_) on = on || l->occupancy[static_cast<std::size_t>(x - 1)] > 0;
    int& w = where_[static_cast<std::size_t>(x - 1)];
    if (on && w < 0) {
      w = static_cast<int>(act_.size());
      act_.push_back(x);
    } else if (!on && w >= 0) {
      long back = act_.back();
      act_[static_cast<std::size_t>(w)] = back;
      where_[static_cast<std::size_t>(back - 1)] = w;
      act_.pop_back();
      w = -1;
    }
  }

  std::vector<ZrConfig*> ls_;
  std::vector<long> act_;
  std::vector<int> where_;
  std::pair<long, long> last_{0, 0};
};

void trim(ZrConfig& c) {
  while (!c.occupancy.empty() && c.occupancy.back() == 0) c.occupancy.pop_back();
}

template <class Check>
void run(Layers& ls, const AsepParams& a, double t0, double t_end, Stream& g, Check&& check) {
  double t = t0;
  for (;;) {
    double rate = a.p + static_cast<double>(ls.active());
    if (rate <= 0.0) break;
    t += g.exponential() / rate;
    if (t > t_end) break;
    if (g.uniform() * rate < a.p)
      ls.inject();
    else
      ls.move_from(g, a);
    check(ls.last());
  }
}

}  // namespace

ZrConfig evolve_zr(ZrConfig config, const AsepParams& params, double t_end, Stream& rng) {
  check_params(params);
  if (!(t_end >= config.time)) throw Error(Errc::InvalidArgument, "t_end must be >= configuration time");
  if (t_end == config.time) return config;
  Layers ls({&config});
  run(ls, params, config.time, t_end, rng, [](std::pair<long, long>) {});
  config.time = t_end;
  trim(config);
  return config;
}

long tagged_displacement(const ZrConfig& config) { return config.total(); }

double SumPmf::mean() const {
  double m = 0.0;
  for (std::size_t k = 0; k < pmf.size(); ++k) m += static_cast<double>(k) * pmf[k];
  return m;
}

void SumPmf::write_csv(std::ostream& os) const {
  os << "k,prob,eps\n";
  char buf[96];
  for (std::size_t k = 0; k < pmf.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", k, pmf[k], eps);
    os << buf;
  }
}

long default_x_max(double r, double tol) {
  if (!(r > 0.0 && r < 1.0)) throw Error(Errc::RatioOutOfRange, "ratio must lie in (0, 1)");
  // tail after X is at most r^{X+1} / ((1 - r)(1 - r^{X+1}))
  long X = 0;
  for (;;) {
    double rx = std::pow(r, static_cast<double>(X + 1));
    if (rx / ((1.0 - r) * (1.0 - rx)) < tol) return X;
    ++X;
  }
}

double mu_sum_mean(double r) {
  if (!(r > 0.0 && r < 1.0)) throw Error(Errc::RatioOutOfRange, "ratio must lie in (0, 1)");
  double s = 0.0, rx = 1.0;
  for (int x = 1; x < 100000; ++x) {
    rx *= r;
    double term = rx / (1.0 - rx);
    s += term;
    if (term < 1e-18 * s) break;
  }
  return s;
}

SumPmf mu_sum_distribution(double r, double eps) {
  if (!(r > 0.0 && r < 1.0)) throw Error(Errc::RatioOutOfRange, "ratio must lie in (0, 1)");
  if (!(eps > 0.0 && eps < 1.0)) throw Error(Errc::InvalidArgument, "eps must lie in (0, 1)");
  SumPmf out;
  out.ratio = r;
  out.x_max = default_x_max(r, eps / 2.0);
  for (std::size_t K = 64;; K *= 2) {
    std::vector<double> pmf(K + 1, 0.0);
    pmf[0] = 1.0;
    for (long x = 1; x <= out.x_max; ++x) {
      double rx = std::pow(r, static_cast<double>(x));
      // convolve with Geometric(1 - r^x) on multiples of 1: P(k) = (1 - rx) rx^k
      // in place: new[k] = (1 - rx) sum_j rx^j old[k - j] = (1 - rx) old[k] + rx new[k - 1]
      double prev = 0.0;
      for (std::size_t k = 0; k <= K; ++k) {
        double v = (1.0 - rx) * pmf[k] + rx * prev;
        pmf[k] = v;
        prev = v;
      }
    }
    double mass = 0.0;
    for (double v : pmf) mass += v;
    if (1.0 - mass < eps / 2.0 || K > (1u << 24)) {
      while (pmf.size() > 1 && pmf.back() == 0.0) pmf.pop_back();
      out.pmf = std::move(pmf);
      out.eps = std::max(0.0, 1.0 - mass) + eps / 2.0;
      return out;
    }
  }
}

ZrConfig sample_mu(double r, long x_max, Stream& rng) {
  if (!(r > 0.0 && r < 1.0)) throw Error(Errc::RatioOutOfRange, "ratio must lie in (0, 1)");
  if (x_max < 0) throw Error(Errc::InvalidArgument, "x_max must be >= 0");
  ZrConfig c;
  for (long x = 1; x <= x_max; ++x) {
    std::geometric_distribution<long> geo(1.0 - std::pow(r, static_cast<double>(x)));
    c.set(x, geo(rng));
  }
  trim(c);
  return c;
}

bool dominated(const ZrConfig& lower, const ZrConfig& upper) {
  std::size_t n = std::max(lower.occupancy.size(), upper.occupancy.size());
  for (std::size_t x = 1; x <= n; ++x)
    if (lower.at(static_cast<long>(x)) > upper.at(static_cast<long>(x))) return false;
  return true;
}

std::pair<ZrConfig, ZrConfig> coupled_evolve(ZrConfig lower, ZrConfig upper, const AsepParams& params, double t_end,
                                             Stream& rng, bool check_each_event) {
  check_params(params);
  if (!dominated(lower, upper)) throw Error(Errc::DominationViolated, "lower must be sitewise <= upper");
  double t0 = std::max(lower.time, upper.time);
  if (!(t_end >= t0)) throw Error(Errc::InvalidArgument, "t_end must be >= configuration time");
  Layers ls({&lower, &upper});
  auto check = [&](std::pair<long, long> xy) {
    if (!check_each_event) return;
    for (long x : {xy.first, xy.second})
      if (x >= 1 && lower.at(x) > upper.at(x)) throw Error(Errc::DominationViolated, "coupling broke domination");
  };
  run(ls, params, t0, t_end, rng, check);
  lower.time = upper.time = t_end;
  trim(lower);
  trim(upper);
  if (!dominated(lower, upper)) throw Error(Errc::DominationViolated, "coupling broke domination");
  return {std::move(lower), std::move(upper)};
}

}  // namespace sepx
