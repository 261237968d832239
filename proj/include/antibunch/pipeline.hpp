#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "antibunch/coincidence.hpp"
#include "antibunch/config.hpp"
#include "antibunch/detector.hpp"
#include "antibunch/spacetime.hpp"

namespace antibunch {

// Totals from one simulated run, before any coincidence analysis.
struct SimulationSummary {
  std::uint64_t pairs = 0;         // pairs emitted by the source
  std::uint64_t herald_tags = 0;   // time tags written per channel
  std::uint64_t a_tags = 0;
  std::uint64_t b_tags = 0;
  std::uint64_t tags_written = 0;  // total records in the output file
  DetectionStats stats_h;
  DetectionStats stats_a;
  DetectionStats stats_b;
};

// Runs the full optical chain for `config` and writes the merged tag stream
// to `out_tags`. Deterministic for a fixed config (including master_seed).
SimulationSummary run_simulation(const ExperimentConfig& config,
                                 const std::filesystem::path& out_tags);

// Everything the analysis stage produces for one tag stream.
struct RunReport {
  std::string config_digest;
  SeparationCertificate certificate;
  ResultsTable table;
  CountWithError product_ab;   // P_A * P_B assuming independence
  CountWithError accidental;   // predicted accidental P(1,1)
  CountWithError ratio;        // measured P(1,1) / predicted accidental
  DelayHistogram hist_a;       // herald->A delay histogram
  DelayHistogram hist_b;       // herald->B delay histogram
  std::uint64_t tags_read = 0;
  std::size_t peak_buffered = 0;  // high-water mark of analysis buffering
};

// Streams `tags_path` once through the coincidence engine and derives the
// full results table plus the separation certificate for the geometry.
RunReport run_analysis(const std::filesystem::path& tags_path,
                       const ExperimentConfig& config);

// `quantity,value,sigma` rows; rows without a statistical error leave the
// sigma column empty.
void write_report_csv(const RunReport& report, std::ostream& out);

// `bin_start_ps,count` rows.
void write_histogram_csv(const DelayHistogram& hist, std::ostream& out);

// simulate + analyze + write artifacts into `out_dir`:
//   tags.ptag, report.csv, hist_HA.csv, hist_HB.csv, effective_config.txt
RunReport run_full_report(const ExperimentConfig& config,
                          const std::filesystem::path& out_dir);

}  // namespace antibunch
