#include "antibunch/optics.hpp"

#include <algorithm>
#include <stdexcept>

#include "antibunch/random.hpp"

namespace antibunch {

namespace {

void require_sorted(std::span<const std::int64_t> arrivals, const char* op) {
  if (!std::is_sorted(arrivals.begin(), arrivals.end())) {
    throw std::invalid_argument(std::string(op) + ": arrivals must be sorted");
  }
}

void require_probability(double p, const char* what) {
  if (!(p >= 0.0) || !(p <= 1.0)) {
    throw std::invalid_argument(std::string(what) + " must be in [0, 1]");
  }
}

}  // namespace

void thin_into(std::span<const std::int64_t> arrivals, double transmission,
               std::int64_t delay_ps, Rng& rng,
               std::vector<std::int64_t>& out) {
  for (std::int64_t t : arrivals) {
    if (rng.bernoulli(transmission)) out.push_back(t + delay_ps);
  }
}

void split_into(std::span<const std::int64_t> arrivals, double ratio_to_a,
                Rng& rng, std::vector<std::int64_t>& arm_a,
                std::vector<std::int64_t>& arm_b) {
  for (std::int64_t t : arrivals) {
    (rng.bernoulli(ratio_to_a) ? arm_a : arm_b).push_back(t);
  }
}

std::vector<std::int64_t> propagate(std::span<const std::int64_t> arrivals,
                                    const PathParams& path,
                                    std::uint64_t seed) {
  require_probability(path.transmission, "propagate: transmission");
  if (path.delay_ps < 0) {
    throw std::invalid_argument("propagate: delay must be >= 0");
  }
  require_sorted(arrivals, "propagate");

  Rng rng(seed);
  std::vector<std::int64_t> out;
  out.reserve(static_cast<std::size_t>(arrivals.size() * path.transmission) + 16);
  thin_into(arrivals, path.transmission, path.delay_ps, rng, out);
  return out;
}

std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>> beamsplit(
    std::span<const std::int64_t> arrivals, const SplitterParams& splitter) {
  require_probability(splitter.ratio_to_a, "beamsplit: ratio_to_A");
  require_sorted(arrivals, "beamsplit");

  Rng rng(splitter.seed);
  std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>> arms;
  split_into(arrivals, splitter.ratio_to_a, rng, arms.first, arms.second);
  return arms;
}

}  // namespace antibunch
