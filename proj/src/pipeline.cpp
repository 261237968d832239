#include "antibunch/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "antibunch/errors.hpp"
#include "antibunch/optics.hpp"
#include "antibunch/random.hpp"
#include "antibunch/source.hpp"
#include "antibunch/tag_file.hpp"

namespace antibunch {

namespace {

// Per-block RNG label: "<stage>/block/<index>". Each optical stage consumes
// an independent stream so inserting or removing a stage never perturbs the
// draws of the others.
std::uint64_t stage_seed(std::uint64_t master, const char* stage,
                         std::uint64_t block) {
  std::string label(stage);
  label += "/block/";
  label += std::to_string(block);
  return derive_seed(master, label);
}

// Background counts, generated in the same fixed blocks as the source so the
// realization is independent of the total duration's block count.
void append_darks(double rate_hz, std::int64_t duration_ps,
                  std::uint64_t master, const char* stage,
                  std::vector<std::int64_t>& out) {
  if (rate_hz <= 0.0) return;
  std::uint64_t block = 0;
  for (std::int64_t t0 = 0; t0 < duration_ps; t0 += kSourceBlockPs, ++block) {
    const std::int64_t t1 = std::min(t0 + kSourceBlockPs, duration_ps);
    Rng rng(stage_seed(master, stage, block));
    append_poisson_times(rate_hz, t0, t1, rng, out);
  }
}

// Sort accumulated clicks, apply detector dead time, quantize to TDC tags.
std::vector<TimeTag> finish_channel(std::vector<std::int64_t>& clicks,
                                    const DetectorParams& det,
                                    std::int64_t resolution_ps,
                                    std::uint8_t channel,
                                    DetectionStats& stats) {
  std::sort(clicks.begin(), clicks.end());
  dead_time_filter(clicks, det.dead_time_ps, &stats.dead_time_drops);
  return tdc_quantize(clicks, resolution_ps, channel);
}

// Applies thinning + jitter into `out`, tracking the accepted count.
void detect_stage(std::span<const std::int64_t> arrivals,
                  const DetectorParams& det, Rng& rng,
                  std::vector<std::int64_t>& out, DetectionStats& stats) {
  const std::size_t before = out.size();
  thin_and_jitter_into(arrivals, det.efficiency, det.jitter_sigma_ps, rng, out,
                       stats.clamped);
  stats.detected_photons += out.size() - before;
}

void format_double(std::ostream& os, double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  os.write(buf, r.ptr - buf);
}

void csv_row(std::ostream& os, const char* quantity, double value,
             double sigma) {
  os << quantity << ',';
  format_double(os, value);
  os << ',';
  format_double(os, sigma);
  os << '\n';
}

void csv_row(std::ostream& os, const char* quantity,
             const CountWithError& v) {
  csv_row(os, quantity, v.value, v.sigma);
}

void csv_row_plain(std::ostream& os, const char* quantity,
                   const std::string& value) {
  os << quantity << ',' << value << ",\n";
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  return out;
}

}  // namespace

SimulationSummary run_simulation(const ExperimentConfig& config,
                                 const std::filesystem::path& out_tags) {
  validate(config);
  const std::uint64_t master = config.master_seed;

  SourceParams source;
  source.pair_rate_hz = config.pair_rate_hz;
  source.duration_s = config.duration_s;
  source.seed = derive_seed(master, "source");
  PairGenerator generator(source);

  SimulationSummary summary;
  std::vector<std::int64_t> clicks_h, clicks_a, clicks_b;
  std::vector<PairEmission> block;
  std::vector<std::int64_t> emitted, herald_path, signal_path, to_a, to_b, arm;

  std::uint64_t block_idx = 0;
  while (generator.next_block(block)) {
    summary.pairs += block.size();
    emitted.clear();
    emitted.reserve(block.size());
    for (const auto& pair : block) emitted.push_back(pair.t_ps);

    // Herald photon: shared coupling loss, herald arm, detector.
    herald_path.clear();
    {
      Rng rng(stage_seed(master, "coupling_H", block_idx));
      thin_into(emitted, config.coupling.transmission,
                config.coupling.delay_ps, rng, herald_path);
    }
    arm.clear();
    {
      Rng rng(stage_seed(master, "arm_H", block_idx));
      thin_into(herald_path, config.arm_h.transmission,
                config.arm_h.delay_ps, rng, arm);
    }
    {
      Rng rng(stage_seed(master, "det_H/thin", block_idx));
      detect_stage(arm, config.det_h, rng, clicks_h, summary.stats_h);
    }

    // Signal photon: independent coupling loss, splitter, arm, detector.
    signal_path.clear();
    {
      Rng rng(stage_seed(master, "coupling_S", block_idx));
      thin_into(emitted, config.coupling.transmission,
                config.coupling.delay_ps, rng, signal_path);
    }
    to_a.clear();
    to_b.clear();
    {
      Rng rng(stage_seed(master, "splitter", block_idx));
      split_into(signal_path, config.splitter_ratio_to_a, rng, to_a, to_b);
    }
    arm.clear();
    {
      Rng rng(stage_seed(master, "arm_A", block_idx));
      thin_into(to_a, config.arm_a.transmission, config.arm_a.delay_ps, rng,
                arm);
    }
    {
      Rng rng(stage_seed(master, "det_A/thin", block_idx));
      detect_stage(arm, config.det_a, rng, clicks_a, summary.stats_a);
    }
    arm.clear();
    {
      Rng rng(stage_seed(master, "arm_B", block_idx));
      thin_into(to_b, config.arm_b.transmission, config.arm_b.delay_ps, rng,
                arm);
    }
    {
      Rng rng(stage_seed(master, "det_B/thin", block_idx));
      detect_stage(arm, config.det_b, rng, clicks_b, summary.stats_b);
    }
    ++block_idx;
  }

  const std::int64_t duration_ps = generator.duration_ps();
  const std::size_t before_h = clicks_h.size();
  const std::size_t before_a = clicks_a.size();
  const std::size_t before_b = clicks_b.size();
  append_darks(config.det_h.dark_rate_hz, duration_ps, master, "det_H/dark",
               clicks_h);
  append_darks(config.det_a.dark_rate_hz, duration_ps, master, "det_A/dark",
               clicks_a);
  append_darks(config.det_b.dark_rate_hz, duration_ps, master, "det_B/dark",
               clicks_b);
  summary.stats_h.dark_counts = clicks_h.size() - before_h;
  summary.stats_a.dark_counts = clicks_a.size() - before_a;
  summary.stats_b.dark_counts = clicks_b.size() - before_b;

  const auto tags_h = finish_channel(clicks_h, config.det_h,
                                     config.tdc_resolution_ps, kChannelHerald,
                                     summary.stats_h);
  const auto tags_a = finish_channel(clicks_a, config.det_a,
                                     config.tdc_resolution_ps, kChannelA,
                                     summary.stats_a);
  const auto tags_b = finish_channel(clicks_b, config.det_b,
                                     config.tdc_resolution_ps, kChannelB,
                                     summary.stats_b);
  summary.herald_tags = tags_h.size();
  summary.a_tags = tags_a.size();
  summary.b_tags = tags_b.size();

  SpanTagSource src_h(tags_h), src_a(tags_a), src_b(tags_b);
  MergeTagSource merged({&src_h, &src_a, &src_b});
  TagFileHeader header;
  header.resolution_ps = static_cast<std::uint32_t>(config.tdc_resolution_ps);
  header.channel_count = 3;
  summary.tags_written = write_tags(out_tags, header, merged);
  return summary;
}

RunReport run_analysis(const std::filesystem::path& tags_path,
                       const ExperimentConfig& config) {
  validate(config);

  RunReport report;
  report.config_digest = config_digest(config);
  report.certificate = certify_separation(config.geometry);

  const char* label = "LL";
  if (report.certificate.cls == IntervalClass::Spacelike) label = "SL";
  if (report.certificate.cls == IntervalClass::Timelike) label = "TL";

  TagFileReader reader(tags_path);
  const AnalysisConfig analysis = analysis_config(config);
  const StreamAnalysis stream = analyze_stream(reader, analysis);

  report.table =
      build_results_table(stream, stream, stream, stream, analysis, label);
  report.product_ab = independence_product(report.table.p_a, report.table.p_b);
  report.accidental = accidental_prediction(report.table.p_n, report.table.p_a,
                                            report.table.p_b);
  report.ratio = antibunching_ratio(report.table.p_11, report.product_ab);
  report.hist_a = stream.hist_a;
  report.hist_b = stream.hist_b;
  report.tags_read = stream.tags_read;
  report.peak_buffered = stream.peak_buffered;
  return report;
}

void write_report_csv(const RunReport& report, std::ostream& out) {
  const ResultsTable& t = report.table;
  out << "quantity,value,sigma\n";
  csv_row(out, "R_HA", t.r_ha);
  csv_row(out, "R_H(A)", t.r_h_a);
  csv_row(out, "P_A", t.p_a);
  csv_row(out, "R_HB", t.r_hb);
  csv_row(out, "R_H(B)", t.r_h_b);
  csv_row(out, "P_B", t.p_b);
  csv_row(out, "R_HAB", t.r_hab);
  csv_row(out, "R_H(AB)", t.r_h_ab);
  csv_row(out, "P_11", t.p_11);
  csv_row(out, "R_HN", t.r_hn);
  csv_row(out, "R_H(N)", t.r_h_n);
  csv_row(out, "P_N", t.p_n);
  csv_row(out, "P_A*P_B", report.product_ab);
  csv_row(out, "accidental_P_11", report.accidental);
  csv_row(out, "antibunching_ratio", report.ratio);
  csv_row_plain(out, "separation", t.separation);
  csv_row(out, "light_travel_time_ps",
          static_cast<double>(report.certificate.light_travel_time_ps), 0.0);
  csv_row(out, "detection_time_difference_ps",
          static_cast<double>(report.certificate.detection_time_difference_ps),
          0.0);
  csv_row(out, "margin_ps", static_cast<double>(report.certificate.margin_ps),
          0.0);
  csv_row(out, "timing_uncertainty_ps",
          static_cast<double>(report.certificate.uncertainty_ps), 0.0);
  csv_row_plain(out, "separation_undetermined",
                report.certificate.undetermined ? "1" : "0");
  csv_row_plain(out, "config_digest", report.config_digest);
  csv_row(out, "tags_read", static_cast<double>(report.tags_read), 0.0);
  if (!out) throw IoError("failed writing report");
}

void write_histogram_csv(const DelayHistogram& hist, std::ostream& out) {
  out << "bin_start_ps,count\n";
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    out << hist.bin_start(i) << ',' << hist.counts[i] << '\n';
  }
  if (!out) throw IoError("failed writing histogram");
}

RunReport run_full_report(const ExperimentConfig& config,
                          const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto tags_path = out_dir / "tags.ptag";
  run_simulation(config, tags_path);
  RunReport report = run_analysis(tags_path, config);
  {
    auto out = open_out(out_dir / "report.csv");
    write_report_csv(report, out);
  }
  {
    auto out = open_out(out_dir / "hist_HA.csv");
    write_histogram_csv(report.hist_a, out);
  }
  {
    auto out = open_out(out_dir / "hist_HB.csv");
    write_histogram_csv(report.hist_b, out);
  }
  {
    auto out = open_out(out_dir / "effective_config.txt");
    out << canonical_config_text(config);
    if (!out) throw IoError("failed writing effective config");
  }
  return report;
}

}  // namespace antibunch
