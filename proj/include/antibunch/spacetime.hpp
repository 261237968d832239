#pragma once

#include <array>
#include <cstdint>

namespace antibunch {

// Speed of light, exact: 299792458 m/s == 299792458 mm per 1e9 ps.
inline constexpr std::int64_t kLightMmPerGigaPs = 299792458;

// An event localized in time (ps) and space (mm).
struct SpacetimeEvent {
  std::int64_t t_ps = 0;
  std::int64_t x_mm = 0;
  std::int64_t y_mm = 0;
  std::int64_t z_mm = 0;
};

enum class IntervalClass { Spacelike, Timelike, Lightlike };

const char* to_string(IntervalClass c);

// Relativistic interval between two events, decided in exact integer
// arithmetic: Spacelike iff c^2 dt^2 < |dx|^2, Timelike iff >, Lightlike on
// equality. Exact for |dt| <= 2e15 ps and per-axis |dx| <= 2e9 mm (well past
// any laboratory scale); beyond that envelope it falls back to long-double
// arithmetic and stays total.
IntervalClass interval_classify(const SpacetimeEvent& a, const SpacetimeEvent& b);

// Transit time of light through a fiber of the given length and group index.
// Computed exactly as floor(length * group_index / c) with the group index
// quantized to 1e-6 (so 10 m of n=1.5 fiber gives 50034 ps, i.e. the quoted
// "50 ns" delay to 0.07%). Monotone nondecreasing in both arguments.
// Throws std::invalid_argument for negative length or group_index < 1.
std::int64_t fiber_delay_ps(std::int64_t length_mm, double group_index);

// Detector placement and signal-path description used to certify whether two
// detection events are spacelike or timelike separated.
struct GeometryConfig {
  std::array<std::int64_t, 3> det_a_pos_mm{0, 0, 0};
  std::array<std::int64_t, 3> det_b_pos_mm{0, 0, 0};
  std::int64_t fiber_a_mm = 0;  // total fiber run feeding detector A
  std::int64_t fiber_b_mm = 0;  // total fiber run feeding detector B
  double group_index = 1.5;
  std::int64_t timing_uncertainty_ps = 1000;
};

// Outcome of the separation analysis for one geometry. margin_ps is
// light_travel_time - |detection time difference|; the classification only
// commits to Spacelike/Timelike when the margin clears the stated timing
// uncertainty, otherwise it reports Lightlike with undetermined set.
struct SeparationCertificate {
  IntervalClass cls = IntervalClass::Lightlike;
  std::int64_t light_travel_time_ps = 0;
  std::int64_t detection_time_difference_ps = 0;  // fiber transit B - A
  std::int64_t margin_ps = 0;
  std::int64_t uncertainty_ps = 0;
  bool undetermined = false;
};

// Throws ConfigError when the geometry is invalid (group index < 1,
// negative fiber length or uncertainty).
SeparationCertificate certify_separation(const GeometryConfig& geometry);

}  // namespace antibunch
