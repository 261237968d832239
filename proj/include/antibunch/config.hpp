#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "antibunch/coincidence.hpp"
#include "antibunch/detector.hpp"
#include "antibunch/optics.hpp"
#include "antibunch/spacetime.hpp"

namespace antibunch {

// Full description of one simulated run: source brightness, the shared
// collection optics, the splitter, per-arm fibers, the three detectors, the
// TDC, the coincidence windows, and the lab geometry used for the
// separation certificate. Loaded from flat "key = value" files whose keys
// are the field paths noted below (also listed in the README); unknown keys
// are rejected.
struct ExperimentConfig {
  double pair_rate_hz = 0.0;       // source.pair_rate
  PathParams coupling;             // coupling.transmission / coupling.delay
  double splitter_ratio_to_a = 0.5;  // splitter.ratio_to_A
  PathParams arm_h, arm_a, arm_b;  // arm_X.transmission / arm_X.delay
  DetectorParams det_h, det_a, det_b;  // det_X.*; seed fields are derived
  std::int64_t tdc_resolution_ps = 50;  // tdc_resolution
  WindowSpec window_ha, window_hb;  // windows.HA.* / windows.HB.*
  std::int64_t hist_bin_width_ps = 50;             // analysis.hist_bin_width
  std::int64_t hist_half_span_ps = 10000;          // analysis.hist_half_span
  std::int64_t peak_exclusion_half_width_ps = 5000;  // analysis.peak_exclusion_half_width
  GeometryConfig geometry;         // geometry.*
  double duration_s = 60.0;        // duration
  std::uint64_t master_seed = 1;   // master_seed
};

// Calibrated reference setups: "spacelike-paper" places the detectors 10 m
// apart with equal fiber runs (simultaneous detections, spacelike
// separated); "timelike-paper" moves the 10 m delay loop from arm A to
// arm B, so detection B trails A by ~100 ns (timelike). Throws ConfigError
// for an unknown name.
ExperimentConfig preset(const std::string& name);

// Applies "key = value" assignments to `config`. Lines may carry
// '#' comments; later assignments override earlier ones. Throws ConfigError
// on unknown keys or unparsable values. Does not validate ranges; call
// validate() after.
void apply_config_text(const std::string& text, ExperimentConfig& config);

// Range/consistency checks; throws ConfigError naming the offending key.
void validate(const ExperimentConfig& config);

// Reads a config file over the spacelike-paper defaults and validates.
// Missing or unreadable files are configuration errors.
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical one-line-per-key rendering (stable ordering and number
// formatting); two configs serialize identically iff every field matches.
std::string canonical_config_text(const ExperimentConfig& config);

// 64-bit FNV-1a of the canonical text, as 16 hex digits. Changes iff a
// semantically meaningful field changes.
std::string config_digest(const ExperimentConfig& config);

// The coincidence-analysis slice of a run configuration.
AnalysisConfig analysis_config(const ExperimentConfig& config);

}  // namespace antibunch
