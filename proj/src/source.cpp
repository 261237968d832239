#include "antibunch/source.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "antibunch/random.hpp"

namespace antibunch {

PairGenerator::PairGenerator(const SourceParams& params) : params_(params) {
  if (!(params.pair_rate_hz >= 0.0) || !std::isfinite(params.pair_rate_hz)) {
    throw std::invalid_argument("source: pair_rate must be >= 0");
  }
  if (!(params.duration_s > 0.0) || !std::isfinite(params.duration_s)) {
    throw std::invalid_argument("source: duration must be > 0");
  }
  duration_ps_ = std::llround(params.duration_s * 1e12);
}

bool PairGenerator::next_block(std::vector<PairEmission>& out) {
  out.clear();
  if (block_start_ >= duration_ps_) return false;

  const std::int64_t block_end =
      std::min(block_start_ + kSourceBlockPs, duration_ps_);
  Rng rng(derive_seed(params_.seed,
                      "source/block/" + std::to_string(block_index_)));

  std::vector<std::int64_t> times;
  times.reserve(static_cast<std::size_t>(
      params_.pair_rate_hz * (block_end - block_start_) * 1e-12 * 1.1 + 16));
  append_poisson_times(params_.pair_rate_hz, block_start_, block_end, rng,
                       times);

  out.reserve(times.size());
  for (std::int64_t t : times) out.push_back({t, next_id_++});

  block_start_ = block_end;
  ++block_index_;
  return true;
}

std::vector<PairEmission> generate_pairs(const SourceParams& params) {
  PairGenerator gen(params);
  std::vector<PairEmission> all;
  std::vector<PairEmission> block;
  while (gen.next_block(block)) {
    all.insert(all.end(), block.begin(), block.end());
  }
  return all;
}

double calibrate_pair_rate(double target_herald_rate_hz,
                           double herald_arm_efficiency) {
  if (!(target_herald_rate_hz >= 0.0) ||
      !std::isfinite(target_herald_rate_hz)) {
    throw std::invalid_argument("calibrate_pair_rate: rate must be >= 0");
  }
  if (!(herald_arm_efficiency > 0.0) || !(herald_arm_efficiency <= 1.0)) {
    throw std::invalid_argument(
        "calibrate_pair_rate: efficiency must be in (0, 1]");
  }
  return target_herald_rate_hz / herald_arm_efficiency;
}

}  // namespace antibunch
