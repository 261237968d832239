#pragma once

#include <cstdint>
#include <vector>

namespace antibunch {

// One photon-pair emission from the CW-pumped down-conversion source.
struct PairEmission {
  std::int64_t t_ps = 0;
  std::uint64_t pair_id = 0;
};

struct SourceParams {
  double pair_rate_hz = 0.0;
  double duration_s = 0.0;
  std::uint64_t seed = 0;
};

// Emission times form a homogeneous Poisson process: exponential gaps with
// mean 1/pair_rate, quantized to 1 ps (ties allowed). Generation proceeds in
// fixed 10 s blocks; each block draws from its own derived seed, so a block
// recomputed in isolation (or in parallel) matches the sequential run, and a
// longer run extends a shorter one with the same seed.
inline constexpr std::int64_t kSourceBlockPs = 10'000'000'000'000;

class PairGenerator {
 public:
  // Throws std::invalid_argument for pair_rate < 0 or duration <= 0.
  explicit PairGenerator(const SourceParams& params);

  // Overwrites `out` with the next block's emissions (possibly none) and
  // returns true, or returns false when the run is exhausted.
  bool next_block(std::vector<PairEmission>& out);

  std::int64_t duration_ps() const { return duration_ps_; }

 private:
  SourceParams params_;
  std::int64_t duration_ps_ = 0;
  std::int64_t block_start_ = 0;
  std::uint64_t block_index_ = 0;
  std::uint64_t next_id_ = 0;
};

// Materialized convenience wrapper around PairGenerator. Timestamps are
// nondecreasing and pair ids strictly increasing; the emission count is
// Poisson-distributed with mean pair_rate * duration.
std::vector<PairEmission> generate_pairs(const SourceParams& params);

// Inverts a measured herald detection rate into the source pair rate given
// the total herald-arm efficiency, e.g. (9283 Hz, 0.196) -> 47362 Hz.
// Throws std::invalid_argument unless rate >= 0 and efficiency in (0, 1].
double calibrate_pair_rate(double target_herald_rate_hz,
                           double herald_arm_efficiency);

}  // namespace antibunch
