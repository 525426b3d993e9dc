#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace sepx {

inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

enum class Subsystem : std::uint64_t {
  initial = 1,
  dynamics = 2,
  bootstrap = 3,
  stationary = 4,
  synthetic = 5,
};

// Counter-based stream: output i is mix64(key + (i+1)*gamma).
class Stream {
 public:
  using result_type = std::uint64_t;
  static constexpr std::uint64_t gamma = 0x9e3779b97f4a7c15ULL;

  explicit Stream(std::uint64_t key = 0) noexcept : key_(key) {}

  static Stream derive(std::uint64_t base_seed, std::uint64_t replicate, Subsystem sub) noexcept {
    std::uint64_t k = mix64(base_seed ^ 0x6a09e667f3bcc909ULL);
    k = mix64(k ^ mix64(replicate + 0x3c6ef372fe94f82bULL));
    k = mix64(k ^ mix64(static_cast<std::uint64_t>(sub) * gamma));
    return Stream(k);
  }
  Stream split(std::uint64_t index) const noexcept {
    return Stream(mix64(key_ ^ mix64(index * gamma + 0xa54ff53a5f1d36f1ULL)));
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * gamma);
  }

  // [0, 1)
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  double exponential() noexcept { return -std::log1p(-uniform()); }
  // [0, n)
  std::uint64_t below(std::uint64_t n) noexcept {
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      std::uint64_t thresh = (0 - n) % n;
      while (lo < thresh) {
        m = static_cast<unsigned __int128>((*this)()) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }
  bool coin() noexcept { return ((*this)() >> 63) != 0; }
  std::uint64_t counter() const noexcept { return counter_; }
  std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace sepx
