#include "sepx/stats_harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "json.hpp"

#include "sepx/error.hpp"

namespace sepx {

double EmpiricalDist::cdf(double x) const {
  return static_cast<double>(std::upper_bound(values.begin(), values.end(), x) - values.begin()) /
         static_cast<double>(values.size());
}

double EmpiricalDist::cdf_below(double x) const {
  return static_cast<double>(std::lower_bound(values.begin(), values.end(), x) - values.begin()) /
         static_cast<double>(values.size());
}

EmpiricalDist make_empirical(std::vector<double> values) {
  if (values.empty()) throw Error(Errc::SampleTooSmall, "empirical distribution needs n >= 1");
  std::sort(values.begin(), values.end());
  EmpiricalDist e;
  e.values = std::move(values);
  return e;
}

EmpiricalDist make_empirical(const std::vector<long>& values) {
  return make_empirical(std::vector<double>(values.begin(), values.end()));
}

const char* method_name(TestMethod m) {
  switch (m) {
    case TestMethod::dkw: return "dkw";
    case TestMethod::ks_two_sample: return "ks_two_sample";
    case TestMethod::dispersion_bootstrap: return "dispersion_bootstrap";
    case TestMethod::poisson_tv: return "pmf_tv";
    case TestMethod::covariance_sum: return "covariance_sum";
    case TestMethod::trend_strict: return "trend_strict";
    case TestMethod::trend_ratio: return "trend_ratio";
  }
  return "?";
}

std::string to_json(const TestReport& r) {
  nlohmann::json j;
  j["name"] = r.name;
  j["statistic"] = r.statistic;
  j["threshold"] = r.threshold;
  j["pass"] = r.pass;
  j["n"] = r.n;
  j["method"] = method_name(r.method);
  j["confidence"] = r.confidence;
  if (!r.note.empty()) j["note"] = r.note;
  return j.dump();
}

double ks_distance(const EmpiricalDist& emp, const Cdf& cdf) {
  if (emp.values.empty()) throw Error(Errc::SampleTooSmall, "empty sample");
  const auto& v = emp.values;
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < v.size()) {
    std::size_t j = i;
    while (j < v.size() && v[j] == v[i]) ++j;
    double below = static_cast<double>(i) / n, at = static_cast<double>(j) / n;
    double x = v[i];
    d = std::max(d, std::fabs(at - cdf(x)));
    d = std::max(d, std::fabs(below - cdf(std::nextafter(x, -std::numeric_limits<double>::infinity()))));
    i = j;
  }
  return d;
}

double dkw_band(long n, double alpha) {
  if (n < 1) throw Error(Errc::SampleTooSmall, "n must be >= 1");
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

TestReport dkw_report(const EmpiricalDist& emp, const Cdf& cdf, double alpha) {
  TestReport r;
  r.statistic = ks_distance(emp, cdf);
  r.threshold = dkw_band(emp.n(), alpha);
  r.pass = r.statistic <= r.threshold;
  r.n = emp.n();
  r.method = TestMethod::dkw;
  r.confidence = 1.0 - alpha;
  return r;
}

double ks_two_sample(const EmpiricalDist& a, const EmpiricalDist& b) {
  if (a.values.empty() || b.values.empty()) throw Error(Errc::SampleTooSmall, "empty sample");
  double d = 0.0;
  for (const auto* s : {&a, &b})
    for (double x : s->values) d = std::max(d, std::fabs(a.cdf(x) - b.cdf(x)));
  return d;
}

double ks_two_sample_critical(long n, long m, double alpha) {
  double nn = static_cast<double>(n), mm = static_cast<double>(m);
  return std::sqrt(-std::log(alpha / 2.0) / 2.0) * std::sqrt((nn + mm) / (nn * mm));
}

TestReport ks_two_sample_report(const EmpiricalDist& a, const EmpiricalDist& b, double alpha) {
  TestReport r;
  r.statistic = ks_two_sample(a, b);
  r.threshold = ks_two_sample_critical(a.n(), b.n(), alpha);
  r.pass = r.statistic <= r.threshold;
  r.n = std::min(a.n(), b.n());
  r.method = TestMethod::ks_two_sample;
  r.confidence = 1.0 - alpha;
  return r;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw Error(Errc::SampleTooSmall, "empty sample");
  std::sort(v.begin(), v.end());
  double pos = q * static_cast<double>(v.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  std::size_t hi = std::min(lo + 1, v.size() - 1);
  double f = pos - static_cast<double>(lo);
  return v[lo] * (1.0 - f) + v[hi] * f;
}

namespace {

// sample variance minus mean over a histogram of counts
double excess(const std::vector<double>& hist, double n) {
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t k = 0; k < hist.size(); ++k) {
    double c = hist[k], x = static_cast<double>(k);
    m1 += c * x;
    m2 += c * x * x;
  }
  m1 /= n;
  m2 /= n;
  return (m2 - m1 * m1) * n / (n - 1.0) - m1;
}

std::vector<double> histogram(const std::vector<long>& counts) {
  long mx = 0;
  for (long c : counts) {
    if (c < 0) throw Error(Errc::InvalidArgument, "counts must be >= 0");
    mx = std::max(mx, c);
  }
  std::vector<double> h(static_cast<std::size_t>(mx + 1), 0.0);
  for (long c : counts) h[static_cast<std::size_t>(c)] += 1.0;
  return h;
}

// multinomial resample of a histogram by sequential binomials
std::vector<double> resample(const std::vector<double>& hist, double n, Stream& g) {
  std::vector<double> out(hist.size(), 0.0);
  double left = n, mass = n;
  for (std::size_t k = 0; k < hist.size() && left > 0.0; ++k) {
    if (hist[k] == 0.0) continue;
    double p = std::min(1.0, hist[k] / mass);
    std::binomial_distribution<long> bin(static_cast<long>(left), p);
    double c = k + 1 == hist.size() ? left : static_cast<double>(bin(g));
    out[k] = c;
    left -= c;
    mass -= hist[k];
  }
  return out;
}

std::vector<double> poisson_pmf(double lambda, std::size_t upto) {
  std::vector<double> p(upto + 1);
  p[0] = std::exp(-lambda);
  for (std::size_t k = 1; k <= upto; ++k) p[k] = p[k - 1] * lambda / static_cast<double>(k);
  return p;
}

double tv_against(const std::vector<double>& hist, double n, const std::vector<double>& pmf) {
  double d = 0.0, covered = 0.0;
  std::size_t K = std::max(hist.size(), pmf.size());
  for (std::size_t k = 0; k < K; ++k) {
    double h = k < hist.size() ? hist[k] / n : 0.0;
    double p = k < pmf.size() ? pmf[k] : 0.0;
    d += std::fabs(h - p);
    covered += p;
  }
  d += std::max(0.0, 1.0 - covered);
  return std::min(1.0, 0.5 * d);
}

}  // namespace

TestReport dispersion_report(const std::vector<long>& counts, const BootstrapOptions& opt) {
  if (counts.size() < 100) throw Error(Errc::SampleTooSmall, "dispersion test needs n >= 100");
  auto hist = histogram(counts);
  double n = static_cast<double>(counts.size());
  double d = excess(hist, n);
  std::vector<double> boot;
  boot.reserve(static_cast<std::size_t>(opt.resamples));
  for (int b = 0; b < opt.resamples; ++b) {
    Stream g = Stream::derive(opt.seed, static_cast<std::uint64_t>(b), Subsystem::bootstrap);
    boot.push_back(excess(resample(hist, n, g), n));
  }
  double lower = quantile(boot, 1.0 - opt.confidence);
  TestReport r;
  r.statistic = d;
  r.threshold = d - lower;
  r.pass = r.statistic <= r.threshold;
  r.n = static_cast<long>(counts.size());
  r.method = TestMethod::dispersion_bootstrap;
  r.confidence = opt.confidence;
  r.note = "statistic = Var - mean; threshold = one-sided bootstrap margin";
  return r;
}

double pmf_tv(const std::vector<long>& counts, const std::vector<double>& pmf) {
  if (counts.empty()) throw Error(Errc::SampleTooSmall, "empty sample");
  return tv_against(histogram(counts), static_cast<double>(counts.size()), pmf);
}

TestReport pmf_fit(const std::vector<long>& counts, const std::vector<double>& pmf, const BootstrapOptions& opt) {
  if (pmf.empty()) throw Error(Errc::InvalidArgument, "empty reference pmf");
  TestReport r;
  r.statistic = pmf_tv(counts, pmf);
  const double n = static_cast<double>(counts.size());
  // parametric bootstrap: multinomial draws from the reference pmf
  std::vector<double> scaled(pmf.size());
  double tot = 0.0;
  for (double v : pmf) tot += v;
  for (std::size_t k = 0; k < pmf.size(); ++k) scaled[k] = pmf[k] / tot * n;
  while (scaled.size() > 1 && scaled.back() == 0.0) scaled.pop_back();
  std::vector<double> boot;
  boot.reserve(static_cast<std::size_t>(opt.resamples));
  for (int b = 0; b < opt.resamples; ++b) {
    Stream g = Stream::derive(opt.seed, static_cast<std::uint64_t>(b), Subsystem::synthetic);
    boot.push_back(tv_against(resample(scaled, n, g), n, pmf));
  }
  r.threshold = quantile(boot, opt.confidence);
  r.pass = r.statistic <= r.threshold;
  r.n = static_cast<long>(counts.size());
  r.method = TestMethod::poisson_tv;
  r.confidence = opt.confidence;
  return r;
}

double poisson_tv(const std::vector<long>& counts, double lambda) {
  if (!(lambda > 0.0)) throw Error(Errc::InvalidArgument, "lambda must be > 0");
  return pmf_tv(counts, poisson_pmf(lambda, static_cast<std::size_t>(lambda + 12.0 * std::sqrt(lambda) + 30.0)));
}

TestReport poisson_fit(const std::vector<long>& counts, double lambda, const BootstrapOptions& opt) {
  if (!(lambda > 0.0)) throw Error(Errc::InvalidArgument, "lambda must be > 0");
  return pmf_fit(counts, poisson_pmf(lambda, static_cast<std::size_t>(lambda + 12.0 * std::sqrt(lambda) + 30.0)), opt);
}

CovSumEstimate empirical_cov_sum(const std::vector<SiteSnapshot>& snapshots, double z, const BootstrapOptions& opt) {
  if (snapshots.size() < 1000) throw Error(Errc::SampleTooSmall, "covariance sum needs n >= 1000");
  const long lo = snapshots.front().lo, hi = snapshots.front().hi;
  const long first = static_cast<long>(std::floor(z)) + 1;
  if (lo > first || hi < first) throw Error(Errc::WindowMismatch, "window must contain the first site above z");
  // occupied sites above z per replicate
  std::vector<std::vector<long>> occ;
  occ.reserve(snapshots.size());
  for (const auto& s : snapshots) {
    if (s.lo != lo || s.hi != hi) throw Error(Errc::WindowMismatch, "snapshots must share one window");
    std::vector<long> o;
    for (long x = first; x <= hi; ++x)
      if (s.at(x)) o.push_back(x - first);
    occ.push_back(std::move(o));
  }
  const std::size_t W = static_cast<std::size_t>(hi - first + 1);
  const double n = static_cast<double>(snapshots.size());
  std::vector<double> site(W, 0.0);
  auto estimate = [&](const std::vector<double>& weight) {
    std::fill(site.begin(), site.end(), 0.0);
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t r = 0; r < occ.size(); ++r) {
      if (weight[r] == 0.0) continue;
      double c = static_cast<double>(occ[r].size());
      m1 += weight[r] * c;
      m2 += weight[r] * c * c;
      for (long k : occ[r]) site[static_cast<std::size_t>(k)] += weight[r];
    }
    m1 /= n;
    m2 /= n;
    double sv = 0.0;
    for (double c : site) {
      double p = c / n;
      sv += p * (1.0 - p);
    }
    return n / (n - 1.0) * (sv - (m2 - m1 * m1));
  };
  CovSumEstimate out;
  out.n = static_cast<long>(snapshots.size());
  out.value = estimate(std::vector<double>(occ.size(), 1.0));
  std::vector<double> boot;
  std::vector<double> w(occ.size());
  for (int b = 0; b < opt.resamples; ++b) {
    Stream g = Stream::derive(opt.seed, static_cast<std::uint64_t>(b), Subsystem::bootstrap);
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t i = 0; i < occ.size(); ++i) w[static_cast<std::size_t>(g.below(occ.size()))] += 1.0;
    boot.push_back(estimate(w));
  }
  double a = (1.0 - opt.confidence) / 2.0;
  out.ci_low = quantile(boot, a);
  out.ci_high = quantile(boot, 1.0 - a);
  return out;
}

TestReport trend_report(const std::vector<std::pair<double, double>>& values, TrendMode mode, double factor) {
  if (values.size() < 2) throw Error(Errc::SampleTooSmall, "trend needs at least two points");
  for (std::size_t i = 1; i < values.size(); ++i)
    if (!(values[i].first > values[i - 1].first)) throw Error(Errc::InvalidArgument, "t must be strictly increasing");
  TestReport r;
  r.n = static_cast<long>(values.size());
  r.confidence = 1.0;
  if (mode == TrendMode::strict_decrease) {
    long bad = 0;
    for (std::size_t i = 1; i < values.size(); ++i) bad += !(values[i].second < values[i - 1].second);
    r.statistic = static_cast<double>(bad);
    r.threshold = 0.0;
    r.method = TestMethod::trend_strict;
    r.note = "statistic = number of non-decreasing steps";
  } else {
    double mx = -std::numeric_limits<double>::infinity(), mn = std::numeric_limits<double>::infinity();
    for (auto& [t, v] : values) {
      mx = std::max(mx, v);
      mn = std::min(mn, v);
    }
    r.statistic = mn > 0.0 ? mx / mn : std::numeric_limits<double>::infinity();
    r.threshold = factor;
    r.method = TestMethod::trend_ratio;
    r.note = "statistic = max / min";
  }
  r.pass = r.statistic <= r.threshold;
  return r;
}

}  // namespace sepx
