#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace antibunch {

class Rng;

// A lossy fiber segment: survival probability plus a fixed transit delay.
struct PathParams {
  double transmission = 1.0;  // in [0, 1]
  std::int64_t delay_ps = 0;  // >= 0
};

// Non-polarizing beamsplitter: each photon is routed to exactly one arm.
struct SplitterParams {
  double ratio_to_a = 0.5;  // in [0, 1]
  std::uint64_t seed = 0;
};

// Building blocks shared with the block-wise simulation pipeline. They assume
// sorted input (not rechecked) and draw exactly one uniform per photon.
void thin_into(std::span<const std::int64_t> arrivals, double transmission,
               std::int64_t delay_ps, Rng& rng, std::vector<std::int64_t>& out);
void split_into(std::span<const std::int64_t> arrivals, double ratio_to_a,
                Rng& rng, std::vector<std::int64_t>& arm_a,
                std::vector<std::int64_t>& arm_b);

// Bernoulli-thins a sorted arrival stream by `transmission` and shifts the
// survivors by `delay_ps`. Order is preserved. Throws std::invalid_argument
// for parameters out of range or unsorted input.
std::vector<std::int64_t> propagate(std::span<const std::int64_t> arrivals,
                                    const PathParams& path, std::uint64_t seed);

// Routes every photon to arm A with probability ratio_to_a, otherwise to
// arm B. The two outputs are sorted and partition the input exactly: no
// photon is lost or duplicated. Throws std::invalid_argument for a ratio out
// of [0, 1] or unsorted input.
std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>> beamsplit(
    std::span<const std::int64_t> arrivals, const SplitterParams& splitter);

}  // namespace antibunch
