#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sepx/stats_harness.hpp"

namespace sepx {

// Pinned tolerances.
namespace tol {
inline constexpr double alpha = 0.01;              // DKW / KS level
inline constexpr double mean_sigmas = 3.0;         // mean identity
inline constexpr double ratio_factor = 5.0;        // bounded-ratio trends
inline constexpr double gap_at_1e8 = 0.15;         // numeric mean gap
inline constexpr double asep_tv_slack = 0.02;      // TV at t = 200
inline constexpr double asep_mean_z = 2.5758293035489;  // two-sided 99% normal quantile
inline constexpr double mean_excess_k = 5.0;       // |f - phi/u^2| <= K phi/u^4
inline constexpr double tail_x_scaled = 2.0;       // normal tail ratio trend
}  // namespace tol

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  std::vector<TestReport> reports;
};

struct AcceptanceOptions {
  std::uint64_t seed = 20240611ULL;
  int workers = 1;
};

inline constexpr int kCriterionCount = 12;

std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids, const AcceptanceOptions& opt,
                                            const std::function<void(const CriterionResult&)>& on_done = {});

std::string format_line(const CriterionResult& r);

}  // namespace sepx
