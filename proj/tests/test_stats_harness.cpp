#include <cmath>
#include <random>

#include "doctest.h"
#include "sepx/error.hpp"
#include "sepx/stats_harness.hpp"

using namespace sepx;

namespace {

std::vector<long> poisson_sample(double lam, int n, std::uint64_t seed) {
  std::vector<long> v;
  Stream g(seed);
  std::poisson_distribution<long> pd(lam);
  for (int i = 0; i < n; ++i) v.push_back(pd(g));
  return v;
}

}  // namespace

TEST_CASE("ks and dkw") {
  CHECK(dkw_band(20000) == doctest::Approx(0.011509).epsilon(1e-4));
  CHECK(dkw_band(10000) == doctest::Approx(0.016276).epsilon(1e-4));
  Stream g(4);
  std::vector<double> u;
  for (int i = 0; i < 10000; ++i) u.push_back(g.uniform());
  auto e = make_empirical(u);
  auto unif = [](double x) { return std::clamp(x, 0.0, 1.0); };
  auto rep = dkw_report(e, unif);
  CHECK(rep.pass);
  CHECK(rep.statistic <= 0.01628);
  // invariant under x -> exp(x) applied to both
  std::vector<double> eu;
  for (double x : u) eu.push_back(std::exp(x));
  double d2 = ks_distance(make_empirical(eu), [](double y) { return std::clamp(std::log(y), 0.0, 1.0); });
  CHECK(d2 == doctest::Approx(rep.statistic).epsilon(1e-9));
  CHECK(ks_distance(make_empirical(std::vector<double>{0.5}), unif) == doctest::Approx(0.5));
  // lattice sample vs its own step cdf
  std::vector<long> pk = poisson_sample(2.0, 20000, 8);
  auto pcdf = [](double x) {
    if (x < 0) return 0.0;
    double s = 0.0, term = std::exp(-2.0);
    for (int k = 0; k <= static_cast<int>(std::floor(x)); ++k) {
      s += term;
      term *= 2.0 / (k + 1);
    }
    return s;
  };
  CHECK(dkw_report(make_empirical(pk), pcdf).pass);
  CHECK_FALSE(dkw_report(make_empirical(pk), [&](double x) { return pcdf(x - 1.0); }).pass);
  CHECK_THROWS_AS(make_empirical(std::vector<double>{}), Error);
}

TEST_CASE("two-sample ks") {
  auto a = poisson_sample(3.0, 5000, 1), b = poisson_sample(3.0, 5000, 2), c = poisson_sample(3.3, 5000, 3);
  CHECK(ks_two_sample_critical(5000, 5000) == doctest::Approx(1.6276 * std::sqrt(2.0 / 5000)).epsilon(1e-4));
  CHECK(ks_two_sample_report(make_empirical(a), make_empirical(b)).pass);
  CHECK_FALSE(ks_two_sample_report(make_empirical(a), make_empirical(c)).pass);
  CHECK(ks_two_sample(make_empirical(a), make_empirical(a)) == 0.0);
}

TEST_CASE("dispersion_report") {
  CHECK(dispersion_report(poisson_sample(2.0, 10000, 5)).pass);
  CHECK(dispersion_report(std::vector<long>(500, 3)).pass);
  CHECK(dispersion_report(std::vector<long>(500, 0)).pass);
  // negative binomial with Var = 2 mean: r = mean, p = 1/2
  Stream g(6);
  std::negative_binomial_distribution<long> nb(2, 0.5);
  std::vector<long> over;
  for (int i = 0; i < 10000; ++i) over.push_back(nb(g));
  auto r = dispersion_report(over);
  CHECK_FALSE(r.pass);
  CHECK(r.statistic > 1.5);
  // Bernoulli sums are underdispersed
  std::binomial_distribution<long> bin(6, 0.3);
  std::vector<long> under;
  for (int i = 0; i < 2000; ++i) under.push_back(bin(g));
  CHECK(dispersion_report(under).pass);
  try {
    dispersion_report(std::vector<long>(99, 1));
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::SampleTooSmall);
  }
  auto again = dispersion_report(over);
  CHECK(again.threshold == r.threshold);
  CHECK(to_json(r).find("\"method\":\"dispersion_bootstrap\"") != std::string::npos);
}

TEST_CASE("poisson_fit") {
  auto ok = poisson_fit(poisson_sample(0.8, 20000, 7), 0.8);
  CHECK(ok.pass);
  CHECK(ok.statistic >= 0.0);
  auto zeros = poisson_fit(std::vector<long>(2000, 0), 1.0);
  CHECK(zeros.statistic == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
  CHECK_FALSE(zeros.pass);
  CHECK(poisson_tv(std::vector<long>(10, 40), 0.5) <= 1.0);
  CHECK_FALSE(poisson_fit(poisson_sample(1.0, 20000, 9), 0.8).pass);
}

TEST_CASE("empirical_cov_sum") {
  // independent Bernoulli fields have zero covariance
  std::vector<SiteSnapshot> snaps;
  for (int r = 0; r < 4000; ++r) {
    Stream g = Stream::derive(1, r, Subsystem::synthetic);
    SiteSnapshot s;
    s.lo = 0;
    s.hi = 9;
    for (int k = 0; k < 10; ++k) s.occupancy.push_back(g.uniform() < 0.1 * k);
    snaps.push_back(s);
  }
  auto e = empirical_cov_sum(snaps, 2.5);
  CHECK(e.ci_low <= 0.0);
  CHECK(e.ci_high >= 0.0);
  CHECK(e.ci_low < e.value);
  CHECK(e.value < e.ci_high);

  // exactly k of the sites above z occupied: Var N = 0, strong negative correlation
  std::vector<SiteSnapshot> one;
  for (int r = 0; r < 2000; ++r) {
    Stream g = Stream::derive(2, r, Subsystem::synthetic);
    SiteSnapshot s;
    s.lo = 0;
    s.hi = 4;
    s.occupancy.assign(5, 0);
    s.occupancy[g.below(5)] = 1;
    one.push_back(s);
  }
  auto neg = empirical_cov_sum(one, -0.5);
  CHECK(neg.value == doctest::Approx(0.8).epsilon(0.05));  // sum_k p(1-p) = 5 * 0.2 * 0.8
  CHECK(neg.ci_low > 0.0);

  auto bad = one;
  bad[3].hi = 5;
  bad[3].occupancy.push_back(0);
  try {
    empirical_cov_sum(bad, 0.5);
    CHECK(false);
  } catch (const Error& ex) {
    CHECK(ex.code() == Errc::WindowMismatch);
  }
  try {
    empirical_cov_sum(one, -3.0);
    CHECK(false);
  } catch (const Error& ex) {
    CHECK(ex.code() == Errc::WindowMismatch);
  }
  CHECK_THROWS_AS(empirical_cov_sum(std::vector<SiteSnapshot>(10, one[0]), 0.5), Error);
}

TEST_CASE("trend_report") {
  CHECK(trend_report({{1, 3}, {10, 2}, {100, 1}}).pass);
  CHECK_FALSE(trend_report({{1, 1}, {10, 2}}).pass);
  CHECK_FALSE(trend_report({{1, 2}, {10, 2}, {100, 1}}).pass);
  CHECK(trend_report({{1e2, 1.0}, {1e3, 4.9}}, TrendMode::bounded_ratio, 5.0).pass);
  CHECK_FALSE(trend_report({{1e2, 1.0}, {1e3, 5.1}}, TrendMode::bounded_ratio, 5.0).pass);
  CHECK_THROWS_AS(trend_report({{10, 1}, {1, 0}}), Error);
  auto r = trend_report({{1, 3}, {10, 2}, {100, 1}});
  CHECK(r.pass == (r.statistic <= r.threshold));
}
