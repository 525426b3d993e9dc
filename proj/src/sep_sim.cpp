#include "sepx/sep_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "sepx/error.hpp"

namespace sepx {

const char* coupling_name(Coupling c) {
  switch (c) {
    case Coupling::suppressed: return "suppressed";
    case Coupling::stirring: return "stirring";
    case Coupling::free: return "free";
  }
  return "?";
}

Coupling parse_coupling(const std::string& s) {
  if (s == "suppressed") return Coupling::suppressed;
  if (s == "stirring") return Coupling::stirring;
  if (s == "free") return Coupling::free;
  throw Error(Errc::InvalidArgument, "unknown coupling '" + s + "'");
}

long SiteSnapshot::count() const {
  long c = 0;
  for (auto v : occupancy) c += v;
  return c;
}

long ObservableSample::count_at(double z) const {
  for (auto& [zz, c] : n_t)
    if (zz == z) return c;
  throw Error(Errc::InvalidArgument, "threshold not recorded");
}

long FreeConfiguration::count_above(double z) const {
  double f = std::floor(z);
  auto it = std::upper_bound(positions.begin(), positions.end(), f,
                             [](double v, long s) { return v < static_cast<double>(s); });
  return static_cast<long>(positions.end() - it);
}

namespace {

class JumpSampler {
 public:
  explicit JumpSampler(const JumpKernel& k) : off_(k.offsets) {
    double c = 0.0;
    for (double p : k.probs) cum_.push_back(c += 2.0 * p);
    cum_.back() = 2.0;
  }
  long draw(Stream& g) const {
    std::uint64_t r = g();
    long o;
    if (off_.size() == 1) {
      o = off_[0];
    } else {
      double u = static_cast<double>(r >> 11) * 0x1.0p-53;
      std::size_t i = 0;
      while (cum_[i] <= u) ++i;
      o = off_[i];
    }
    return (r & 1) ? o : -o;
  }

 private:
  std::vector<long> off_;
  std::vector<double> cum_;
};

void check_times(double t0, double t_end) {
  if (!(t_end >= t0)) throw Error(Errc::InvalidArgument, "t_end must be >= configuration time");
}

// site -> particle index over a growable window
class SiteIndex {
 public:
  SiteIndex(long lo, long hi, long max_window) : lo_(lo), idx_(static_cast<std::size_t>(hi - lo), -1), cap_(max_window) {}
  long lo() const { return lo_; }
  long hi() const { return lo_ + static_cast<long>(idx_.size()); }
  int get(long x) const { return x < lo_ || x >= hi() ? -1 : idx_[static_cast<std::size_t>(x - lo_)]; }
  void set(long x, int p) {
    ensure(x);
    idx_[static_cast<std::size_t>(x - lo_)] = p;
  }
  void ensure(long x) {
    if (x >= lo_ && x < hi()) return;
    long w = hi() - lo_;
    long grow = std::max(64L, w / 2);
    long nlo = lo_, nhi = hi();
    if (x < lo_) nlo = x - grow;
    if (x >= nhi) nhi = x + 1 + grow;
    if (nhi - nlo > cap_) throw Error(Errc::WindowOverflow, "simulation window exceeds cap");
    std::vector<int> n(static_cast<std::size_t>(nhi - nlo), -1);
    std::copy(idx_.begin(), idx_.end(), n.begin() + (lo_ - nlo));
    idx_.swap(n);
    lo_ = nlo;
  }

 private:
  long lo_;
  std::vector<int> idx_;
  long cap_;
};

}  // namespace

Configuration full_step_reservoir(const JumpKernel& kernel) {
  Configuration c;
  c.left_boundary = -kernel.range;
  for (long x = -kernel.range; x <= 0; ++x) c.occupied.push_back(x);
  c.filled_below = true;
  return c;
}

Configuration evolve_suppressed(Configuration config, const JumpKernel& kernel, double t_end, Stream& rng,
                                SimStats* stats, const EngineLimits& lim) {
  check_times(config.time, t_end);
  if (t_end == config.time) return config;
  const long R = kernel.range;
  JumpSampler js(kernel);
  std::vector<long> pos = config.occupied;
  long lo0 = pos.empty() ? config.left_boundary : std::min(pos.front(), config.left_boundary);
  long hi0 = pos.empty() ? lo0 + 1 : pos.back() + 1;
  SiteIndex site(lo0 - R - 64, hi0 + R + 64, lim.max_window);
  for (std::size_t i = 0; i < pos.size(); ++i) site.set(pos[i], static_cast<int>(i));

  const bool res = config.filled_below;
  long res_lo = config.left_boundary;
  // keep [res_lo, res_lo + R) jammed so reservoir particles never see a hole
  auto refill = [&] {
    for (;;) {
      bool hole = false;
      for (long x = res_lo; x < res_lo + R; ++x)
        if (site.get(x) < 0) hole = true;
      if (!hole) return;
      long nlo = res_lo - std::max(R, 32L);
      for (long x = nlo; x < res_lo; ++x) {
        site.set(x, static_cast<int>(pos.size()));
        pos.push_back(x);
      }
      res_lo = nlo;
    }
  };
  if (res) refill();

  double t = config.time;
  std::uint64_t rings = 0, moves = 0;
  while (!pos.empty()) {
    t += rng.exponential() / static_cast<double>(pos.size());
    if (t > t_end) break;
    ++rings;
    auto p = static_cast<std::size_t>(rng.below(pos.size()));
    long x = pos[p];
    long y = x + js.draw(rng);
    if (res && y < res_lo) continue;
    if (site.get(y) >= 0) continue;
    site.set(x, -1);
    site.set(y, static_cast<int>(p));
    pos[p] = y;
    ++moves;
    if (res && x < res_lo + R) refill();
  }
  if (stats) {
    stats->rings += rings;
    stats->moves += moves;
  }
  std::sort(pos.begin(), pos.end());
  config.occupied = std::move(pos);
  config.time = t_end;
  if (res) {
    config.left_boundary = res_lo;
  } else if (!config.occupied.empty()) {
    config.left_boundary = std::min(config.left_boundary, config.occupied.front());
  }
  return config;
}

namespace {

// Rejection-free stirring: only pairs (k, k+o) with differing contents carry events.
class PairEngine {
 public:
  PairEngine(const Configuration& c, const JumpKernel& k, const EngineLimits& lim)
      : R_(k.range), off_(k.offsets), w_(k.probs), res_(c.filled_below), cap_(lim.max_window) {
    long a = c.occupied.empty() ? c.left_boundary : std::min(c.occupied.front(), c.left_boundary);
    long b = c.occupied.empty() ? a : c.occupied.back();
    lo_ = res_ ? c.left_boundary - R_ : a - R_ - 16;
    long hi = b + R_ + 64;
    occ_.assign(static_cast<std::size_t>(hi - lo_), 0);
    if (res_)
      for (long x = lo_; x < c.left_boundary; ++x) occ_[static_cast<std::size_t>(x - lo_)] = 1;
    for (long x : c.occupied) occ_[static_cast<std::size_t>(x - lo_)] = 1;
    act_.resize(off_.size());
    where_.assign(off_.size(), std::vector<int>(occ_.size(), -1));
    for (std::size_t q = 0; q < off_.size(); ++q)
      for (long x = lo_; x + off_[q] < hi_(); ++x) refresh(q, x);
  }

  double rate() const {
    double r = 0.0;
    for (std::size_t q = 0; q < off_.size(); ++q) r += w_[q] * static_cast<double>(act_[q].size());
    return r;
  }

  void fire(Stream& g, double total) {
    std::size_t q = 0;
    if (off_.size() > 1) {
      double u = g.uniform() * total;
      for (; q + 1 < off_.size(); ++q) {
        double m = w_[q] * static_cast<double>(act_[q].size());
        if (u < m) break;
        u -= m;
      }
      while (act_[q].empty()) --q;
    }
    long k = act_[q][static_cast<std::size_t>(g.below(act_[q].size()))];
    long b = k + off_[q];
    std::swap(cell(k), cell(b));
    margin(k);
    margin(b);
    touch(k);
    touch(b);
  }

  Configuration result(double t) const {
    Configuration c;
    c.time = t;
    c.filled_below = res_;
    c.left_boundary = lo_;
    for (long x = lo_; x < hi_(); ++x)
      if (occ_[static_cast<std::size_t>(x - lo_)]) c.occupied.push_back(x);
    return c;
  }

 private:
  long hi_() const { return lo_ + static_cast<long>(occ_.size()); }
  std::uint8_t& cell(long x) { return occ_[static_cast<std::size_t>(x - lo_)]; }
  bool occ(long x) const {
    if (x < lo_) return res_;
    if (x >= hi_()) return false;
    return occ_[static_cast<std::size_t>(x - lo_)] != 0;
  }

  void refresh(std::size_t q, long k) {
    if (k < lo_ || k + off_[q] >= hi_()) return;
    bool a = occ(k) != occ(k + off_[q]);
    int& w = where_[q][static_cast<std::size_t>(k - lo_)];
    if (a && w < 0) {
      w = static_cast<int>(act_[q].size());
      act_[q].push_back(k);
    } else if (!a && w >= 0) {
      long last = act_[q].back();
      act_[q][static_cast<std::size_t>(w)] = last;
      where_[q][static_cast<std::size_t>(last - lo_)] = w;
      act_[q].pop_back();
      w = -1;
    }
  }

  void touch(long s) {
    for (std::size_t q = 0; q < off_.size(); ++q) {
      refresh(q, s - off_[q]);
      refresh(q, s);
    }
  }

  // pairs reaching outside the window must stay inactive
  void margin(long s) {
    bool o = occ(s);
    if (o && s > hi_() - 1 - R_) grow(lo_, s + R_ + 1 + std::max(64L, static_cast<long>(occ_.size()) / 2));
    bool left_bad = res_ ? !o : o;
    if (left_bad && s < lo_ + R_) grow(s - R_ - std::max(64L, static_cast<long>(occ_.size()) / 2), hi_());
  }

  void grow(long nlo, long nhi) {
    if (nhi - nlo > cap_) throw Error(Errc::WindowOverflow, "simulation window exceeds cap");
    std::vector<std::uint8_t> n(static_cast<std::size_t>(nhi - nlo), 0);
    if (res_) std::fill(n.begin(), n.begin() + (lo_ - nlo), 1);
    std::copy(occ_.begin(), occ_.end(), n.begin() + (lo_ - nlo));
    occ_.swap(n);
    for (auto& wv : where_) {
      std::vector<int> m(occ_.size(), -1);
      std::copy(wv.begin(), wv.end(), m.begin() + (lo_ - nlo));
      wv.swap(m);
    }
    lo_ = nlo;
  }

  long R_;
  std::vector<long> off_;
  std::vector<double> w_;
  bool res_;
  long cap_;
  long lo_ = 0;
  std::vector<std::uint8_t> occ_;
  std::vector<std::vector<long>> act_;
  std::vector<std::vector<int>> where_;
};

}  // namespace

Configuration evolve_stirring(Configuration config, const JumpKernel& kernel, double t_end, Stream& rng,
                              SimStats* stats, const EngineLimits& lim) {
  check_times(config.time, t_end);
  if (t_end == config.time) return config;
  PairEngine eng(config, kernel, lim);
  double t = config.time;
  std::uint64_t ev = 0;
  for (;;) {
    double r = eng.rate();
    if (r <= 0.0) break;
    t += rng.exponential() / r;
    if (t > t_end) break;
    eng.fire(rng, r);
    ++ev;
  }
  if (stats) {
    stats->rings += ev;
    stats->moves += ev;
  }
  return eng.result(t_end);
}

LabeledRun evolve_stirring_labeled(const Configuration& config, const JumpKernel& kernel, double t_end, Stream& rng,
                                   const EngineLimits& lim) {
  check_times(config.time, t_end);
  if (config.filled_below) throw Error(Errc::InvalidArgument, "labeled stirring needs a finite configuration");
  LabeledRun out;
  out.initial = config.occupied;
  out.positions = config.occupied;
  auto& pos = out.positions;
  JumpSampler js(kernel);
  long lo = pos.empty() ? 0 : pos.front(), hi = pos.empty() ? 1 : pos.back() + 1;
  SiteIndex site(lo - 64, hi + 64, lim.max_window);
  for (std::size_t i = 0; i < pos.size(); ++i) site.set(pos[i], static_cast<int>(i));
  double t = config.time;
  while (!pos.empty() && t_end > config.time) {
    t += rng.exponential() / static_cast<double>(pos.size());
    if (t > t_end) break;
    auto p = static_cast<std::size_t>(rng.below(pos.size()));
    long x = pos[p];
    long y = x + js.draw(rng);
    int q = site.get(y);
    if (q < 0) {
      site.set(x, -1);
      site.set(y, static_cast<int>(p));
      pos[p] = y;
    } else if (rng.coin()) {
      // each ordered attempt at rate p_d, halved: pair exchange at rate p_d
      site.set(x, q);
      site.set(y, static_cast<int>(p));
      pos[p] = y;
      pos[static_cast<std::size_t>(q)] = x;
    }
  }
  out.config.occupied = pos;
  std::sort(out.config.occupied.begin(), out.config.occupied.end());
  out.config.time = t_end;
  out.config.left_boundary =
      out.config.occupied.empty() ? config.left_boundary : std::min(config.left_boundary, out.config.occupied.front());
  return out;
}

FreeConfiguration evolve_free(const Configuration& config, const JumpKernel& kernel, double t_end, Stream& rng) {
  check_times(config.time, t_end);
  if (config.filled_below) throw Error(Errc::InvalidArgument, "free motion needs a finite configuration");
  FreeConfiguration out;
  out.time = t_end;
  double dt = t_end - config.time;
  std::vector<std::poisson_distribution<long>> pois;
  for (double p : kernel.probs) pois.emplace_back(dt * p);
  out.positions.reserve(config.occupied.size());
  for (long x : config.occupied) {
    long d = 0;
    if (dt > 0.0) {
      for (std::size_t q = 0; q < pois.size(); ++q) {
        long up = pois[q](rng), down = pois[q](rng);
        d += kernel.offsets[q] * (up - down);
      }
    }
    out.positions.push_back(x + d);
  }
  std::sort(out.positions.begin(), out.positions.end());
  return out;
}

SiteSnapshot snapshot_of(const Configuration& config, long lo, long hi) {
  if (hi < lo) throw Error(Errc::InvalidArgument, "empty snapshot window");
  SiteSnapshot s;
  s.lo = lo;
  s.hi = hi;
  s.t = config.time;
  s.occupancy.assign(static_cast<std::size_t>(hi - lo + 1), 0);
  for (long x : config.occupied)
    if (x >= lo && x <= hi) s.occupancy[static_cast<std::size_t>(x - lo)] = 1;
  if (config.filled_below)
    for (long x = lo; x <= hi && x < config.left_boundary; ++x) s.occupancy[static_cast<std::size_t>(x - lo)] = 1;
  return s;
}

ReplicatePlan plan_replicates(const StepProfile& profile, const JumpKernel& kernel, double t,
                              const std::vector<double>& z_list, Coupling coupling, const ReplicateOptions& opt) {
  ReplicatePlan plan;
  if (coupling != Coupling::free && opt.reservoir && profile.is_full() && !opt.cut) {
    plan.reservoir = true;
    return plan;
  }
  if (opt.cut) {
    plan.cut = *opt.cut;
    return plan;
  }
  double zr = 0.5;
  if (!z_list.empty()) zr = std::max(zr, *std::min_element(z_list.begin(), z_list.end()));
  plan.cut = t > 0.0 ? required_left_cut(profile, kernel, t, zr, opt.cut_eps) : 0;
  if (profile.l_cut) plan.cut = std::max(plan.cut, -*profile.l_cut);
  return plan;
}

std::vector<ObservableSample> run_replicates(const StepProfile& profile, const JumpKernel& kernel, double t,
                                             const std::vector<double>& z_list, int m_max, long n,
                                             std::uint64_t base_seed, Coupling coupling,
                                             const ReplicateOptions& opt) {
  if (n <= 0) throw Error(Errc::EmptyRun, "replicate count must be >= 1");
  if (m_max < 0) throw Error(Errc::InvalidArgument, "m_max must be >= 0");
  ReplicatePlan plan = plan_replicates(profile, kernel, t, z_list, coupling, opt);
  std::vector<ObservableSample> out(static_cast<std::size_t>(n));

  auto one = [&](long r) {
    Stream init = Stream::derive(base_seed, static_cast<std::uint64_t>(r), Subsystem::initial);
    Stream dyn = Stream::derive(base_seed, static_cast<std::uint64_t>(r), Subsystem::dynamics);
    ObservableSample s;
    s.seed = dyn.key();
    s.t = t;
    Configuration c0 = plan.reservoir ? full_step_reservoir(kernel) : sample_initial(profile, plan.cut, init);
    SimStats st;
    if (coupling == Coupling::free) {
      auto f = evolve_free(c0, kernel, t, dyn);
      for (auto it = f.positions.rbegin(); it != f.positions.rend() && s.order_stats.size() <= std::size_t(m_max); ++it)
        s.order_stats.push_back(*it);
      for (double z : z_list) s.n_t.emplace_back(z, f.count_above(z));
    } else {
      Configuration c = coupling == Coupling::suppressed ? evolve_suppressed(c0, kernel, t, dyn, &st, opt.limits)
                                                         : evolve_stirring(c0, kernel, t, dyn, &st, opt.limits);
      s.order_stats = c.top(static_cast<std::size_t>(m_max));
      for (double z : z_list) s.n_t.emplace_back(z, c.count_above(z));
      if (opt.snapshot_window) s.snapshot = snapshot_of(c, opt.snapshot_window->first, opt.snapshot_window->second);
    }
    s.events = st.rings;
    s.x_t = s.order_stats.empty() ? 0 : s.order_stats.front();
    out[static_cast<std::size_t>(r)] = std::move(s);
  };

  int workers = std::max(1, opt.workers);
  if (workers == 1 || n == 1) {
    for (long r = 0; r < n; ++r) one(r);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (long r = w; r < n; r += workers) one(r);
        } catch (...) {
          errs[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errs)
      if (e) std::rethrow_exception(e);
  }
  return out;
}

double scaled_position(long x_t, const ScalingPair& scaling, double sigma) {
  if (!(scaling.b > 0.0)) throw Error(Errc::InvalidArgument, "b_t must be > 0");
  return static_cast<double>(x_t) / (sigma * scaling.b) - scaling.a;
}

}  // namespace sepx
