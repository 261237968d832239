#include "antibunch/detector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "antibunch/random.hpp"

namespace antibunch {

namespace {

void validate(const DetectorParams& p) {
  if (!(p.efficiency >= 0.0) || !(p.efficiency <= 1.0)) {
    throw std::invalid_argument("detector: efficiency must be in [0, 1]");
  }
  if (!(p.jitter_sigma_ps >= 0.0)) {
    throw std::invalid_argument("detector: jitter_sigma must be >= 0");
  }
  if (!(p.dark_rate_hz >= 0.0)) {
    throw std::invalid_argument("detector: dark_rate must be >= 0");
  }
  if (p.dead_time_ps < 0) {
    throw std::invalid_argument("detector: dead_time must be >= 0");
  }
}

}  // namespace

void thin_and_jitter_into(std::span<const std::int64_t> arrivals,
                          double efficiency, double jitter_sigma_ps, Rng& rng,
                          std::vector<std::int64_t>& out,
                          std::uint64_t& clamped) {
  for (std::int64_t t : arrivals) {
    if (!rng.bernoulli(efficiency)) continue;
    std::int64_t click = t;
    if (jitter_sigma_ps > 0.0) {
      click += std::llround(rng.normal() * jitter_sigma_ps);
      if (click < 0) {
        click = 0;
        ++clamped;
      }
    }
    out.push_back(click);
  }
}

void dead_time_filter(std::vector<std::int64_t>& clicks,
                      std::int64_t dead_time_ps, std::uint64_t* drops) {
  if (dead_time_ps <= 0 || clicks.empty()) return;
  std::size_t kept = 1;
  std::int64_t last = clicks[0];
  for (std::size_t i = 1; i < clicks.size(); ++i) {
    if (clicks[i] - last < dead_time_ps) {
      if (drops) ++*drops;
      continue;
    }
    last = clicks[i];
    clicks[kept++] = last;
  }
  clicks.resize(kept);
}

DetectionResult detect(std::span<const std::int64_t> arrivals,
                       const DetectorParams& params, double duration_s) {
  validate(params);
  if (!(duration_s >= 0.0) || !std::isfinite(duration_s)) {
    throw std::invalid_argument("detect: duration must be >= 0");
  }
  if (!std::is_sorted(arrivals.begin(), arrivals.end())) {
    throw std::invalid_argument("detect: arrivals must be sorted");
  }

  DetectionResult result;
  Rng thin_rng(derive_seed(params.seed, "detect/thin"));
  thin_and_jitter_into(arrivals, params.efficiency, params.jitter_sigma_ps,
                       thin_rng, result.clicks, result.stats.clamped);
  result.stats.detected_photons = result.clicks.size();

  const std::int64_t duration_ps = std::llround(duration_s * 1e12);
  Rng dark_rng(derive_seed(params.seed, "detect/dark"));
  std::vector<std::int64_t> darks;
  append_poisson_times(params.dark_rate_hz, 0, duration_ps, dark_rng, darks);
  result.stats.dark_counts = darks.size();

  result.clicks.insert(result.clicks.end(), darks.begin(), darks.end());
  std::sort(result.clicks.begin(), result.clicks.end());
  dead_time_filter(result.clicks, params.dead_time_ps,
                   &result.stats.dead_time_drops);
  return result;
}

std::vector<TimeTag> tdc_quantize(std::span<const std::int64_t> clicks,
                                  std::int64_t resolution_ps,
                                  std::uint8_t channel) {
  if (resolution_ps <= 0) {
    throw std::invalid_argument("tdc_quantize: resolution must be > 0");
  }
  std::vector<TimeTag> tags;
  tags.reserve(clicks.size());
  for (std::int64_t t : clicks) {
    // Euclidean floor; click times are clamped nonnegative upstream but keep
    // the quantizer well defined for any input.
    std::int64_t q = t / resolution_ps;
    if (t < 0 && q * resolution_ps != t) --q;
    const std::int64_t quantized = q * resolution_ps;
    tags.push_back({quantized < 0 ? 0ull : static_cast<std::uint64_t>(quantized),
                    channel});
  }
  return tags;
}

}  // namespace antibunch
