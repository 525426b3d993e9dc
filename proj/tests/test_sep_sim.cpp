#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "sepx/error.hpp"
#include "sepx/sep_sim.hpp"

using namespace sepx;

namespace {

Configuration sites(std::vector<long> sites) {
  Configuration c;
  c.occupied = std::move(sites);
  c.left_boundary = c.occupied.front();
  return c;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double var_of(const std::vector<double>& v) {
  double m = mean_of(v), s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST_CASE("identity at t_end = time") {
  auto nn = nearest_neighbor_kernel();
  Stream g(1);
  auto c = sites({-3, -1, 0});
  CHECK(evolve_suppressed(c, nn, 0.0, g).occupied == c.occupied);
  CHECK(evolve_stirring(c, nn, 0.0, g).occupied == c.occupied);
  CHECK(g.counter() == 0);
  try {
    c.time = 2.0;
    evolve_suppressed(c, nn, 1.0, g);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InvalidArgument);
  }
}

TEST_CASE("single particle variance") {
  auto k = build_kernel({{1, 0.3}, {2, 0.2}}, 1.0);
  const int n = 10000;
  std::vector<double> a, b, c;
  for (int r = 0; r < n; ++r) {
    Stream g = Stream::derive(7, r, Subsystem::dynamics);
    a.push_back(static_cast<double>(evolve_suppressed(sites({0}), k, 4.0, g).occupied[0]));
    b.push_back(static_cast<double>(evolve_stirring(sites({0}), k, 4.0, g).occupied[0]));
    c.push_back(static_cast<double>(evolve_free(sites({0}), k, 4.0, g).positions[0]));
  }
  // E X^4 = 4 s2^2 t^2 + ... ; Var(sample var) ~ 2 (s2 t)^2 / n for near-normal
  double target = k.sigma2 * 4.0;
  double tol = 5.0 * target * std::sqrt(3.0 / n);
  for (auto* v : {&a, &b, &c}) {
    CHECK(std::fabs(var_of(*v) - target) < tol);
    CHECK(std::fabs(mean_of(*v)) < 5.0 * std::sqrt(target / n));
  }
}

TEST_CASE("nearest-neighbour order and conservation") {
  auto nn = nearest_neighbor_kernel();
  auto two = build_kernel({{1, 0.25}, {3, 0.25}}, 1.0);
  for (int r = 0; r < 200; ++r) {
    Stream g = Stream::derive(3, r, Subsystem::dynamics);
    auto c = sites({0, 1});
    for (int step = 1; step <= 20; ++step) {
      c = evolve_suppressed(c, nn, 0.5 * step, g);
      REQUIRE(c.occupied.size() == 2);
      CHECK(c.occupied[0] < c.occupied[1]);
    }
    auto start = sites({-9, -7, -6, -2, 0});
    auto s1 = evolve_suppressed(start, two, 30.0, g);
    auto s2 = evolve_stirring(start, two, 30.0, g);
    CHECK(s1.occupied.size() == 5);
    CHECK(s2.occupied.size() == 5);
    CHECK(std::adjacent_find(s2.occupied.begin(), s2.occupied.end(), std::greater_equal<long>()) == s2.occupied.end());
  }
}

TEST_CASE("ring count Poisson band") {
  auto nn = nearest_neighbor_kernel();
  SimStats st;
  const int reps = 200;
  const double t = 25.0;
  for (int r = 0; r < reps; ++r) {
    Stream g = Stream::derive(11, r, Subsystem::dynamics);
    evolve_suppressed(sites({-4, -3, -2, -1, 0}), nn, t, g, &st);
  }
  double expect = 5.0 * t * reps;
  CHECK(std::fabs(static_cast<double>(st.rings) - expect) < 5.0 * std::sqrt(expect));
  CHECK(st.moves < st.rings);
}

TEST_CASE("reservoir engines agree with an explicit deep cut") {
  auto nn = nearest_neighbor_kernel();
  auto full = make_profile({1.0});
  const double t = 20.0, z = 4.0;
  const long n = 4000;
  double want = expected_count(full, nn, t, z);
  for (Coupling cp : {Coupling::suppressed, Coupling::stirring}) {
    ReplicateOptions res;
    ReplicateOptions cut;
    cut.cut = -200;
    for (auto* o : {&res, &cut}) {
      auto s = run_replicates(full, nn, t, {z}, 3, n, 99, cp, *o);
      std::vector<double> v;
      for (auto& x : s) v.push_back(static_cast<double>(x.count_at(z)));
      CHECK(std::fabs(mean_of(v) - want) < 4.0 * std::sqrt(var_of(v) / n));
    }
  }
  auto plan = plan_replicates(full, nn, t, {z}, Coupling::suppressed, {});
  CHECK(plan.reservoir);
  CHECK_FALSE(plan_replicates(full, nn, t, {z}, Coupling::free, {}).reservoir);
}

TEST_CASE("labeled stirring") {
  auto k = build_kernel({{1, 0.3}, {2, 0.2}}, 1.0);
  const double t = 6.0, z = 3.0;
  auto tab = transition_pmf(k, t, 1e-12);
  const int n = 6000;
  std::vector<long> mid;
  double s_i = 0.0, s_j = 0.0, s_ij = 0.0;
  for (int r = 0; r < n; ++r) {
    Stream g = Stream::derive(5, r, Subsystem::dynamics);
    auto run = evolve_stirring_labeled(sites({-3, -2, -1, 0}), k, t, g);
    long cnt = 0;
    for (long p : run.positions) cnt += p > z;
    CHECK(cnt == run.config.count_above(z));
    mid.push_back(run.positions[2] - run.initial[2]);
    double a = run.positions[2] > z, b = run.positions[3] > z;
    s_i += a;
    s_j += b;
    s_ij += a * b;
  }
  // marginal vs pmf, DKW at 99%
  std::sort(mid.begin(), mid.end());
  double band = std::sqrt(std::log(2.0 / 0.01) / (2.0 * n));
  double worst = 0.0;
  for (long x = mid.front(); x <= mid.back(); ++x) {
    double emp = static_cast<double>(std::upper_bound(mid.begin(), mid.end(), x) - mid.begin()) / n;
    worst = std::max(worst, std::fabs(emp - (1.0 - tab.tail_from(x + 1))));
  }
  CHECK(worst < band);
  double cov = s_ij / n - (s_i / n) * (s_j / n);
  CHECK(cov < 3.0 * std::sqrt(0.25 / n));
  CHECK(cov < 0.0);
}

TEST_CASE("free product oracle and mean") {
  auto nn = nearest_neighbor_kernel();
  auto full = make_profile({1.0});
  const double t = 30.0;
  const long n = 5000;
  auto s = run_replicates(full, nn, t, {6.0}, 3, n, 21, Coupling::free);
  long cut = plan_replicates(full, nn, t, {6.0}, Coupling::free, {}).cut;
  auto tab = transition_pmf(nn, t, 1e-13);
  std::vector<long> xs;
  std::vector<double> counts;
  for (auto& x : s) {
    xs.push_back(x.x_t);
    counts.push_back(static_cast<double>(x.count_at(6.0)));
  }
  std::sort(xs.begin(), xs.end());
  double worst = 0.0;
  for (long z = xs.front(); z <= xs.back(); ++z) {
    double p = 1.0;
    for (long i = cut; i <= 0; ++i) p *= 1.0 - tab.tail_from(z - i + 1);
    double emp = static_cast<double>(std::upper_bound(xs.begin(), xs.end(), z) - xs.begin()) / n;
    worst = std::max(worst, std::fabs(emp - p));
  }
  CHECK(worst < std::sqrt(std::log(2.0 / 0.01) / (2.0 * n)));
  CHECK(std::fabs(mean_of(counts) - expected_count(full, nn, t, 6.0)) < 4.0 * std::sqrt(var_of(counts) / n));
}

TEST_CASE("run_replicates contract") {
  auto k = build_kernel({{1, 0.3}, {2, 0.2}}, 1.0);
  auto alt = make_profile({1.0, 0.0});
  std::vector<double> zs{2.5, 5.0, 8.0};
  for (Coupling cp : {Coupling::suppressed, Coupling::stirring, Coupling::free}) {
    auto a = run_replicates(alt, k, 15.0, zs, 3, 30, 1234, cp);
    ReplicateOptions two;
    two.workers = 2;
    auto b = run_replicates(alt, k, 15.0, zs, 3, 30, 1234, cp, two);
    for (std::size_t r = 0; r < a.size(); ++r) {
      CHECK(a[r].order_stats == b[r].order_stats);
      CHECK(a[r].n_t == b[r].n_t);
      CHECK(a[r].seed == b[r].seed);
      CHECK(a[r].x_t == a[r].order_stats[0]);
      if (cp != Coupling::free)
        CHECK(std::adjacent_find(a[r].order_stats.begin(), a[r].order_stats.end(), std::less_equal<long>()) ==
              a[r].order_stats.end());
      for (auto& [z, c] : a[r].n_t) {
        long above = 0;
        for (long x : a[r].order_stats) above += static_cast<double>(x) > z;
        if (above < static_cast<long>(a[r].order_stats.size())) CHECK(above == c);
        CHECK((a[r].x_t <= z) == (c == 0));
      }
    }
    CHECK(a[0].seed != a[1].seed);
  }
  try {
    run_replicates(alt, k, 15.0, zs, 3, 0, 1, Coupling::free);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptyRun);
  }
  CHECK_THROWS_AS(parse_coupling("glauber"), Error);
  CHECK(parse_coupling("stirring") == Coupling::stirring);
}

TEST_CASE("snapshot") {
  auto c = full_step_reservoir(nearest_neighbor_kernel());
  auto s = snapshot_of(c, -5, 3);
  CHECK(s.count() == 6);
  CHECK(s.at(-5));
  CHECK_FALSE(s.at(1));
  auto f = snapshot_of(sites({-4, -1, 0}), -2, 2);
  CHECK(f.count() == 2);
}

TEST_CASE("scaled_position") {
  auto s = scaling_full(100.0);
  CHECK(scaled_position(20, s, 1.0) == doctest::Approx(20.0 / 4.659906017846561 - 2.1590520269755173));
  CHECK(scaled_position(20, s, 1.0) == doctest::Approx(2.1330).epsilon(1e-3));
  CHECK(scaled_position(21, s, 1.0) > scaled_position(20, s, 1.0));
}
