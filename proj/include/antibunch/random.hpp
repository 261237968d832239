#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>
#include <vector>

namespace antibunch {

// 64-bit FNV-1a over a byte string.
constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Per-stage seed derivation. Every random stage of a run (each source block,
// each thinning step, each detector's dark generator, ...) draws from its own
// generator seeded by hash(master_seed, stage_label). Stages are therefore
// independent of evaluation order: running blocks in parallel or rerunning a
// single stage in isolation reproduces the sequential result exactly.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view stage) {
  return splitmix64(splitmix64(master) ^ fnv1a64(stage));
}

// mt19937_64 engine (output sequence fixed by the standard) with explicit
// sampling maps, so streams do not depend on the standard library's
// distribution implementations and stay reproducible across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  // Exponential waiting time with the given rate (mean 1/rate).
  double exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

  // Standard normal via Box-Muller; consumes exactly two uniforms per call.
  double normal() {
    const double u1 = 1.0 - uniform01();  // (0, 1]: keeps the log finite
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

// Homogeneous Poisson arrival times on [t0_ps, t1_ps), quantized to 1 ps and
// appended to `out` in nondecreasing order. Zero-length gaps (ties) are
// allowed. Memorylessness makes per-block generation with independent
// generators stitch into one Poisson process over the full interval.
inline void append_poisson_times(double rate_hz, std::int64_t t0_ps,
                                 std::int64_t t1_ps, Rng& rng,
                                 std::vector<std::int64_t>& out) {
  if (rate_hz <= 0.0 || t1_ps <= t0_ps) return;
  std::int64_t t = t0_ps;
  for (;;) {
    const double gap_ps = rng.exponential(rate_hz) * 1e12;
    if (!(gap_ps < 9e18)) break;  // beyond any representable block
    t += std::llround(gap_ps);
    if (t >= t1_ps) break;
    out.push_back(t);
  }
}

}  // namespace antibunch
