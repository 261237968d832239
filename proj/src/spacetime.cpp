#include "antibunch/spacetime.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "antibunch/errors.hpp"

namespace antibunch {

namespace {

using u128 = unsigned __int128;

std::uint64_t abs_diff(std::int64_t a, std::int64_t b) {
  // Unsigned subtraction is exact even when the signed difference overflows.
  return a >= b ? static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b)
                : static_cast<std::uint64_t>(b) - static_cast<std::uint64_t>(a);
}

constexpr u128 kPsPerSecSquared = static_cast<u128>(1000000000000000000ull);  // (1e9)^2

}  // namespace

const char* to_string(IntervalClass c) {
  switch (c) {
    case IntervalClass::Spacelike: return "Spacelike";
    case IntervalClass::Timelike: return "Timelike";
    case IntervalClass::Lightlike: return "Lightlike";
  }
  return "?";
}

IntervalClass interval_classify(const SpacetimeEvent& a, const SpacetimeEvent& b) {
  const std::uint64_t dt = abs_diff(a.t_ps, b.t_ps);
  const std::uint64_t dx = abs_diff(a.x_mm, b.x_mm);
  const std::uint64_t dy = abs_diff(a.y_mm, b.y_mm);
  const std::uint64_t dz = abs_diff(a.z_mm, b.z_mm);

  // With t in ps and x in mm, c = 299792458 / 1e9 mm/ps exactly, so
  //   c^2 dt^2 <=> |dx|^2   iff   (299792458 dt)^2 <=> 1e18 (dx^2+dy^2+dz^2).
  // For per-axis |dx| <= 2e9 the right side is at most 3*(2e9)^2*1e18 < 2^124,
  // so whenever 299792458*dt >= 2^64 the left side (>= 2^128) wins outright;
  // otherwise both sides fit a u128 and compare exactly.
  const std::uint64_t axis_cap = 2000000000ull;
  if (dx <= axis_cap && dy <= axis_cap && dz <= axis_cap) {
    const u128 ct = static_cast<u128>(dt) * static_cast<u128>(kLightMmPerGigaPs);
    const u128 dist2 = static_cast<u128>(dx) * dx + static_cast<u128>(dy) * dy +
                       static_cast<u128>(dz) * dz;
    const u128 rhs = dist2 * kPsPerSecSquared;
    if (ct >> 64) return IntervalClass::Timelike;
    const u128 lhs = ct * ct;
    if (lhs < rhs) return IntervalClass::Spacelike;
    if (lhs > rhs) return IntervalClass::Timelike;
    return IntervalClass::Lightlike;
  }

  // Outside the exact envelope (>2000 km separations): approximate but total.
  const long double ct = static_cast<long double>(dt) * 299792458.0L / 1e9L;
  const long double d2 = static_cast<long double>(dx) * dx +
                         static_cast<long double>(dy) * dy +
                         static_cast<long double>(dz) * dz;
  const long double diff = ct * ct - d2;
  if (diff < 0) return IntervalClass::Spacelike;
  if (diff > 0) return IntervalClass::Timelike;
  return IntervalClass::Lightlike;
}

std::int64_t fiber_delay_ps(std::int64_t length_mm, double group_index) {
  if (length_mm < 0) throw std::invalid_argument("fiber_delay: negative length");
  if (!(group_index >= 1.0) || !(group_index < 1e6)) {
    throw std::invalid_argument("fiber_delay: group index must be >= 1");
  }
  // delay = length * n / c = length * n * 1e9 / 299792458 ps, evaluated as
  // floor(length * round(n * 1e6) * 1e3 / 299792458) in 128-bit arithmetic.
  const std::int64_t n_micro = std::llround(group_index * 1e6);
  const __int128 numerator =
      static_cast<__int128>(length_mm) * n_micro * 1000;
  return static_cast<std::int64_t>(numerator / kLightMmPerGigaPs);
}

SeparationCertificate certify_separation(const GeometryConfig& g) {
  if (!(g.group_index >= 1.0)) {
    throw ConfigError("geometry.group_index must be >= 1");
  }
  if (g.fiber_a_mm < 0 || g.fiber_b_mm < 0) {
    throw ConfigError("geometry fiber lengths must be nonnegative");
  }
  if (g.timing_uncertainty_ps < 0) {
    throw ConfigError("geometry.timing_uncertainty must be nonnegative");
  }

  SeparationCertificate cert;
  cert.uncertainty_ps = g.timing_uncertainty_ps;
  cert.detection_time_difference_ps =
      fiber_delay_ps(g.fiber_b_mm, g.group_index) -
      fiber_delay_ps(g.fiber_a_mm, g.group_index);

  long double d2 = 0;
  for (int i = 0; i < 3; ++i) {
    const long double d = static_cast<long double>(g.det_b_pos_mm[i]) -
                          static_cast<long double>(g.det_a_pos_mm[i]);
    d2 += d * d;
  }
  const long double dist_mm = std::sqrt(d2);
  cert.light_travel_time_ps =
      std::llround(dist_mm * 1e9L / static_cast<long double>(kLightMmPerGigaPs));

  const std::int64_t abs_dt = std::llabs(cert.detection_time_difference_ps);
  cert.margin_ps = cert.light_travel_time_ps - abs_dt;

  if (cert.margin_ps > cert.uncertainty_ps) {
    cert.cls = IntervalClass::Spacelike;
  } else if (-cert.margin_ps > cert.uncertainty_ps) {
    cert.cls = IntervalClass::Timelike;
  } else {
    cert.cls = IntervalClass::Lightlike;
    cert.undetermined = true;
  }
  return cert;
}

}  // namespace antibunch
