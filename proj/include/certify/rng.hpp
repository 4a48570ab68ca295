#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace certify {

// Purpose tag separating the independent sub-streams derived from one seed.
enum class Stream : std::uint64_t {
  Scenario = 1,
  HistoryScenario = 2,
  HistorySim = 3,
  Simulate = 4,
  Prediction = 5,
  Qmc = 6,
  Coin = 7,
  Bench = 8,
  ZoneGen = 9,
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Hash (seed, id, purpose) into a single engine seed. Each draw id owns a
// counter-based stream, so results do not depend on thread count or batch
// layout.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t id,
                              std::uint64_t purpose) {
  std::uint64_t s = seed;
  std::uint64_t h = splitmix64(s);
  s ^= id + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h = splitmix64(s);
  s ^= purpose + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return splitmix64(s);
}

class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t id, Stream purpose)
      : eng_(mix_seed(seed, id, static_cast<std::uint64_t>(purpose))) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  // Hand-rolled so the stream is identical across standard libraries.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * uniform01();
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Uniform index in [0, n), bias-free.
  std::size_t pick(std::size_t n) {
    const std::uint64_t bound = n;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v = eng_();
    while (v >= limit) v = eng_();
    return static_cast<std::size_t>(v % bound);
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace certify
