#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "antibunch/timetag.hpp"

namespace antibunch {

class Rng;

struct DetectorParams {
  double efficiency = 1.0;       // in [0, 1]
  double jitter_sigma_ps = 0.0;  // Gaussian timing jitter, >= 0
  double dark_rate_hz = 0.0;     // Poisson dark counts, >= 0
  std::int64_t dead_time_ps = 0; // non-paralyzable dead time, >= 0
  std::uint64_t seed = 0;
};

struct DetectionStats {
  std::uint64_t detected_photons = 0;  // arrivals that survived thinning
  std::uint64_t dark_counts = 0;
  std::uint64_t clamped = 0;           // jitter pushed a click below t = 0
  std::uint64_t dead_time_drops = 0;
};

struct DetectionResult {
  std::vector<std::int64_t> clicks;  // sorted
  DetectionStats stats;
};

// Pipeline building blocks (input order trusted, output possibly unsorted
// because of jitter; callers sort before the dead-time filter).
void thin_and_jitter_into(std::span<const std::int64_t> arrivals,
                          double efficiency, double jitter_sigma_ps, Rng& rng,
                          std::vector<std::int64_t>& out,
                          std::uint64_t& clamped);

// Keeps the first click and every later click at least dead_time_ps after the
// last accepted one. `clicks` must be sorted.
void dead_time_filter(std::vector<std::int64_t>& clicks,
                      std::int64_t dead_time_ps, std::uint64_t* drops);

// Full detector model applied to one sorted photon-arrival stream:
//  1. Bernoulli thinning by `efficiency`.
//  2. Gaussian timing jitter (sigma = jitter_sigma_ps), rounded to 1 ps;
//     clicks pushed below t = 0 are clamped to 0 and counted in stats.
//  3. Poisson dark counts over [0, duration).
//  4. Merge, sort, and apply the dead-time filter.
// Thinning/jitter and dark generation use seeds derived from params.seed, so
// results are reproducible per (params, duration).
// Throws std::invalid_argument for out-of-range parameters, negative
// duration, or unsorted arrivals.
DetectionResult detect(std::span<const std::int64_t> arrivals,
                       const DetectorParams& params, double duration_s);

// Floor-quantizes sorted click times to the TDC resolution and stamps the
// channel: t -> floor(t / resolution) * resolution. Order is preserved;
// distinct clicks may collapse onto the same tag. Throws
// std::invalid_argument for resolution <= 0.
std::vector<TimeTag> tdc_quantize(std::span<const std::int64_t> clicks,
                                  std::int64_t resolution_ps,
                                  std::uint8_t channel);

}  // namespace antibunch
