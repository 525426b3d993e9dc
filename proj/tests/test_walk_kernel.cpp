#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "sepx/error.hpp"
#include "sepx/rng.hpp"
#include "sepx/walk_kernel.hpp"

using namespace sepx;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::InvalidArgument;
}

// P(xi_t = k) by direct cosine quadrature of the characteristic function.
double cf_pmf(const JumpKernel& k, double t, long x, int n = 8192) {
  double s = 0.0;
  for (int j = 0; j < n; ++j) {
    double u = -std::numbers::pi + 2.0 * std::numbers::pi * (j + 0.5) / n;
    double phi = 0.0;
    for (std::size_t i = 0; i < k.offsets.size(); ++i) phi += 2.0 * k.probs[i] * std::cos(k.offsets[i] * u);
    s += std::exp(t * (phi - 1.0)) * std::cos(x * u);
  }
  return s / n;
}

JumpKernel random_kernel(Stream& g) {
  long R = 1 + static_cast<long>(g.below(4));
  std::vector<OffsetProb> op;
  double tot = 0.0;
  std::vector<double> w;
  for (long j = 1; j <= R; ++j) {
    w.push_back(g.uniform() + 0.05);
    tot += w.back();
  }
  for (long j = 1; j <= R; ++j) op.push_back({j, 0.5 * w[j - 1] / tot});
  return build_kernel(op, 1.0);
}

}  // namespace

TEST_CASE("build_kernel examples and validation") {
  auto nn = build_kernel({{1, 0.5}}, 1.0);
  CHECK(nn.prob(1) == doctest::Approx(0.5));
  CHECK(nn.prob(-1) == doctest::Approx(0.5));
  CHECK(nn.sigma2 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(nn.is_finite_range);
  CHECK(nn.range == 1);

  auto two = build_kernel({{1, 0.25}, {2, 0.25}}, 1.0);
  CHECK(two.sigma2 == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(two.range == 2);

  CHECK(code_of([] { build_kernel({{1, 0.6}}, 1.0); }) == Errc::NonNormalized);
  CHECK(code_of([] { build_kernel({}, 1.0); }) == Errc::EmptySupport);
  CHECK(code_of([] { build_kernel({{1, 0.0}}, 1.0); }) == Errc::EmptySupport);
  CHECK(code_of([] { build_kernel({{1, 0.3}, {-1, 0.2}}, 1.0); }) == Errc::AsymmetricInput);
  CHECK(code_of([] { build_kernel({{0, 0.5}}, 1.0); }) == Errc::ZeroOffset);
  CHECK(code_of([] { build_kernel({{1, 0.5}}, 0.0); }) == Errc::InfiniteMgf);

  auto mirrored = build_kernel({{-1, 0.5}}, 1.0);
  CHECK(mirrored.prob(1) == doctest::Approx(0.5));
  auto both = build_kernel({{1, 0.5}, {-1, 0.5}}, 1.0);
  CHECK(both.sigma2 == doctest::Approx(1.0));
}

TEST_CASE("build_kernel with geometric envelope") {
  double r = 0.3, A = 2.0;
  std::vector<OffsetProb> op;
  double c = (1.0 - r) / (2.0 * r);  // sum_{j>=1} c r^j = 1/2
  for (long j = 1; j <= 40; ++j) op.push_back({j, c * std::pow(r, j)});
  auto k = build_kernel(op, 0.5, TailEnvelope{A, r});
  CHECK_FALSE(k.is_finite_range);
  double s = 0.0;
  for (auto p : k.probs) s += 2.0 * p;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(code_of([&] { build_kernel(op, 1.5, TailEnvelope{A, r}); }) == Errc::InfiniteMgf);
  std::vector<OffsetProb> shortlist(op.begin(), op.begin() + 5);
  CHECK(code_of([&] { build_kernel(shortlist, 0.5, TailEnvelope{A, r}); }) == Errc::TruncationBudgetExceeded);
}

TEST_CASE("transition_pmf oracle values") {
  auto nn = nearest_neighbor_kernel();
  auto t0 = transition_pmf(nn, 0.0, 1e-10);
  CHECK(t0(0) == 1.0);
  CHECK(t0(1) == 0.0);
  CHECK(t0.radius() == 0);

  auto t1 = transition_pmf(nn, 1.0, 1e-12);
  CHECK(t1(0) == doctest::Approx(0.4657596075936404).epsilon(1e-11));
  for (long k = 0; k <= 8; ++k)
    CHECK(t1(k) == doctest::Approx(std::exp(-1.0) * std::cyl_bessel_i(double(k), 1.0)).epsilon(1e-10));

  auto t37 = transition_pmf(nn, 37.5, 1e-12);
  for (long k : {0L, 3L, 10L, 25L})
    CHECK(t37(k) == doctest::Approx(std::exp(-37.5) * std::cyl_bessel_i(double(k), 37.5)).epsilon(1e-9));

  auto two = build_kernel({{1, 0.25}, {2, 0.25}}, 1.0);
  auto tt = transition_pmf(two, 3.0, 1e-12);
  for (long k : {0L, 1L, 2L, 5L, 9L}) CHECK(tt(k) == doctest::Approx(cf_pmf(two, 3.0, k)).epsilon(1e-9));
}

TEST_CASE("transition_pmf invariants over random kernels") {
  Stream g(2024);
  for (int rep = 0; rep < 12; ++rep) {
    auto k = random_kernel(g);
    double t = 50.0 * g.uniform();
    double eps = 1e-10;
    auto tab = transition_pmf(k, t, eps);
    CHECK(tab.mass() <= 1.0);
    CHECK(tab.mass() >= 1.0 - eps);
    CHECK(tab.eps() <= eps);
    for (long x = 0; x <= tab.radius(); ++x) CHECK(tab(x) == tab(-x));
    long x = static_cast<long>(g.below(static_cast<std::uint64_t>(tab.radius()) + 1) / 3);
    CHECK(tab(x) == doctest::Approx(cf_pmf(k, t, x)).epsilon(1e-7));
  }
}

TEST_CASE("Chapman-Kolmogorov") {
  Stream g(7);
  for (auto [t1, t2] : {std::pair{1.0, 1.0}, std::pair{2.0, 3.0}}) {
    for (int rep = 0; rep < 3; ++rep) {
      auto k = rep == 0 ? nearest_neighbor_kernel() : random_kernel(g);
      double eps = 1e-10;
      auto a = transition_pmf(k, t1, eps), b = transition_pmf(k, t2, eps), c = transition_pmf(k, t1 + t2, eps);
      long K = a.radius() + b.radius() + c.radius();
      double tv = 0.0;
      for (long x = -K; x <= K; ++x) {
        double s = 0.0;
        for (long y = -a.radius(); y <= a.radius(); ++y) s += a(y) * b(x - y);
        tv += std::fabs(s - c(x));
      }
      CHECK(0.5 * tv <= 3.0 * eps);
    }
  }
}

TEST_CASE("transition_pmf errors") {
  auto nn = nearest_neighbor_kernel();
  CHECK(code_of([&] { transition_pmf(nn, -1.0, 1e-10); }) == Errc::TimeNegative);
  CHECK(code_of([&] { transition_pmf(nn, 1.0, 1e-16); }) == Errc::TruncationBudgetExceeded);
  PmfOptions tight;
  tight.max_support = 100;
  CHECK(code_of([&] { transition_pmf(nn, 1e4, 1e-10, tight); }) == Errc::TruncationBudgetExceeded);
}

TEST_CASE("batch tables agree with single tables") {
  auto k = build_kernel({{1, 0.3}, {3, 0.2}}, 1.0);
  std::vector<double> ts{0.0, 0.5, 7.0, 40.0};
  auto batch = transition_pmfs(k, ts, 1e-11);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    auto one = transition_pmf(k, ts[i], 1e-11);
    for (long x = 0; x <= one.radius(); ++x) CHECK(batch[i](x) == doctest::Approx(one(x)).epsilon(1e-12));
  }
}

TEST_CASE("tail_prob") {
  auto nn = nearest_neighbor_kernel();
  CHECK(tail_prob(nn, 0.0, 0.5, 1e-10) == 0.0);
  CHECK(tail_prob(nn, 0.0, -0.5, 1e-10) == 1.0);
  CHECK(tail_prob(nn, 1.0, 0.0, 1e-12) == doctest::Approx(0.2671201962031798).epsilon(1e-11));
  CHECK(tail_prob(nn, 5.0, -1e9, 1e-10) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(tail_prob(nn, 5.0, 1e9, 1e-10) == 0.0);
  // real threshold: strict integer comparison, no rounding
  CHECK(tail_prob(nn, 4.0, 2.0, 1e-12) == doctest::Approx(tail_prob(nn, 4.0, 2.999, 1e-12)));
  CHECK(tail_prob(nn, 4.0, 2.0, 1e-12) < tail_prob(nn, 4.0, 1.999, 1e-12));
  // translation identity P_i(xi > z) = P_0(xi > z - i)
  auto tab = transition_pmf(nn, 9.0, 1e-12);
  double direct = 0.0;
  for (long k = 4; k <= 60; ++k) direct += tab(k - (-3));
  CHECK(tab.tail_above(3.5 - (-3)) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("inversion route matches frozen Bessel sums and tables") {
  auto nn = nearest_neighbor_kernel();
  CHECK(progression_tail_inversion(nn, 1e4, 200, 1, 1) == doctest::Approx(0.023021430922952064).epsilon(1e-10));
  CHECK(progression_tail_inversion(nn, 1e4, 1, 1, 1) == doctest::Approx(0.49800526366269765).epsilon(1e-10));
  CHECK(progression_tail_inversion(nn, 1e6, 3000, 1, 1) == doctest::Approx(0.0013521183904531414).epsilon(1e-9));
  CHECK(progression_tail_inversion(nn, 1e6, 500, 1, 1) == doctest::Approx(0.30871356589980725).epsilon(1e-10));
  CHECK(progression_tail_inversion(nn, 1e8, 34000, 1, 1) == doctest::Approx(0.00033699089507104794).epsilon(1e-8));
  CHECK(progression_tail_inversion(nn, 1e4, 201, 1, -1) == doctest::Approx(0.8490927586405744).epsilon(1e-10));
  CHECK(progression_tail_inversion(nn, 1e6, 10000, 1, -1) == doctest::Approx(7.5542858677411845e-22).epsilon(1e-7));
  CHECK(progression_tail_inversion(nn, 1e4, 150, 2, 5) == doctest::Approx(0.3123301345736128).epsilon(1e-10));

  Stream g(99);
  for (int rep = 0; rep < 6; ++rep) {
    auto k = rep == 0 ? nn : random_kernel(g);
    double t = rep < 3 ? 30.0 : 700.0;
    auto tab = transition_pmf(k, t, 1e-13);
    long sd = static_cast<long>(std::sqrt(k.sigma2 * t));
    for (long a : {-sd, 0L, 1L, sd, 3 * sd}) {
      for (long m : {1L, 2L, 3L}) {
        for (long c : {1L, 4L, -1L}) {
          if (c < 0 && a < -1) continue;
          double x = progression_tail(tab, a, m, c);
          double y = progression_tail_inversion(k, t, a, m, c);
          CHECK(y == doctest::Approx(x).epsilon(1e-9).scale(1e-12));
        }
      }
    }
  }
}

TEST_CASE("chernoff_log_tail") {
  auto nn = nearest_neighbor_kernel();
  CHECK(chernoff_log_tail(nn, 100.0, 0.0) == 0.0);
  double lam = 0.1;
  CHECK(chernoff_log_tail(nn, 100.0, 10.0) == doctest::Approx(-lam * 10.0 + 100.0 * (std::cosh(lam) - 1.0)).epsilon(1e-13));
  CHECK(chernoff_log_tail(nn, 100.0, 10.0) == doctest::Approx(-0.4995831944196496).epsilon(1e-12));
  CHECK(code_of([&] { chernoff_log_tail(nn, 100.0, 100.5); }) == Errc::OutOfChernoffRange);

  Stream g(3);
  for (int rep = 0; rep < 4; ++rep) {
    auto k = rep == 0 ? nn : random_kernel(g);
    for (double t : {10.0, 100.0}) {
      auto tab = transition_pmf(k, t, 1e-13);
      long xmax = static_cast<long>(std::floor(k.sigma2 * k.theta * t));
      for (long x = 0; x <= xmax; ++x) {
        double tail = tab.tail_from(x);
        if (tail <= 1e-300) continue;
        CHECK(chernoff_log_tail(k, t, double(x)) >= std::log(tail) - 1e-12);
      }
    }
  }
}

TEST_CASE("local_clt_density and gaussian helpers") {
  auto nn = nearest_neighbor_kernel();
  CHECK(local_clt_density(nn, 2.0 * std::numbers::pi, 0) == doctest::Approx(1.0 / (2.0 * std::numbers::pi)));
  CHECK(local_clt_density(nn, 100.0, 0) == doctest::Approx(0.039894228040143268).epsilon(1e-14));
  CHECK(local_clt_density(nn, 37.0, 5) == local_clt_density(nn, 37.0, -5));

  CHECK(gaussian_mean_excess(0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-15));
  CHECK(gaussian_mean_excess(1.0) == doctest::Approx(0.0833154705876863).epsilon(1e-14));
  double u = 6.0;
  double asym = normal_pdf(u) / (u * u);
  CHECK(std::fabs(gaussian_mean_excess(u) / asym - 1.0) <= 5.0 / (u * u));
  CHECK(normal_sf(1.0) == doctest::Approx(0.15865525393145705).epsilon(1e-15));
  CHECK(normal_cdf(-1.0) == doctest::Approx(0.15865525393145705).epsilon(1e-15));
}

TEST_CASE("tail estimate numerics") {
  auto nn = nearest_neighbor_kernel();
  CHECK(pmf_shift_distance(nn, 10.0, 0, 1e-12) == 0.0);
  CHECK(grad_residual_distance(nn, 10.0, 0, 1e-12) == 0.0);
  for (long y : {1L, 2L, 5L})
    CHECK(pmf_shift_distance(nn, 17.0, y, 1e-12) == doctest::Approx(pmf_shift_distance(nn, 17.0, -y, 1e-12)).epsilon(1e-12));
  CHECK(grad_residual_distance(nn, 100.0, 2, 1e-12) <= 2.0 * grad_residual_distance(nn, 100.0, 1, 1e-12) + 1e-12);

  double lo = 1e300, hi = 0.0;
  for (double t : {10.0, 100.0, 1000.0}) {
    auto tab = transition_pmf(nn, t, 1e-12);
    for (long y : {1L, 2L, 5L}) {
      double r = pmf_shift_distance(tab, y) * std::sqrt(t) / double(y);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  }
  CHECK(hi / lo <= 5.0);
  CHECK(normal_tail_ratio_error(nn, 1e4, 2.0) < normal_tail_ratio_error(nn, 1e2, 2.0));
}

TEST_CASE("pmf csv export") {
  auto tab = transition_pmf(nearest_neighbor_kernel(), 1.0, 1e-12);
  std::ostringstream os;
  tab.write_csv(os);
  auto s = os.str();
  CHECK(s.rfind("k,prob\n", 0) == 0);
  CHECK(s.find("0,0.46575960") != std::string::npos);
}
