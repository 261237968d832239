#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "antibunch/timetag.hpp"

namespace antibunch {

// Coincidence window around an expected delay, half-open:
//   [center - width/2, center - width/2 + width)
struct WindowSpec {
  std::int64_t center_ps = 0;
  std::int64_t width_ps = 1000;

  std::int64_t lo() const { return center_ps - width_ps / 2; }
  std::int64_t hi() const { return lo() + width_ps; }
};

// Histogram of target-minus-herald delays over [min_delay, max_delay),
// which must be a whole number of bins.
struct DelayHistogram {
  std::int64_t bin_width_ps = 50;
  std::int64_t min_delay_ps = 0;
  std::int64_t max_delay_ps = 0;
  std::vector<std::uint64_t> counts;

  std::int64_t bin_start(std::size_t i) const {
    return min_delay_ps + static_cast<std::int64_t>(i) * bin_width_ps;
  }
  std::uint64_t total() const;
};

// A measured or derived quantity with its 1-sigma uncertainty.
struct CountWithError {
  double value = 0.0;
  double sigma = 0.0;

  // Raw event counts carry Poisson errors: sigma = sqrt(N).
  static CountWithError from_count(double n);
};

// ---------------------------------------------------------------------------
// Streaming accumulators. Each consumes one (time, channel)-sorted stream tag
// by tag; buffered state is bounded by the window/histogram span times the
// local tag density, never by the stream length. push() raises DataError if
// the stream violates (t, channel) order.
// ---------------------------------------------------------------------------

// All-pairs delay histogram: every (herald, target) pair whose delay
// t_target - t_herald lands in [min_delay, max_delay) increments one bin.
class DelayHistogrammer {
 public:
  DelayHistogrammer(std::uint8_t herald_channel, std::uint8_t target_channel,
                    std::int64_t bin_width_ps, std::int64_t min_delay_ps,
                    std::int64_t max_delay_ps);

  void push(const TimeTag& tag);
  const DelayHistogram& finish();
  std::size_t peak_buffered() const { return peak_buffered_; }

 private:
  void order_check(const TimeTag& tag);
  void note_buffered();

  std::uint8_t herald_ch_, target_ch_;
  DelayHistogram hist_;
  std::deque<std::uint64_t> heralds_;
  std::deque<std::uint64_t> targets_;
  TimeTag last_{};
  bool have_last_ = false;
  std::size_t peak_buffered_ = 0;
};

struct DoubleCounts {
  std::uint64_t coincidences = 0;  // heralds with >= 1 target in the window
  std::uint64_t heralds = 0;       // all herald tags seen
};

// Heralded double-coincidence counter. A herald is counted at most once no
// matter how many targets share its window.
class DoubleCoincidenceCounter {
 public:
  DoubleCoincidenceCounter(std::uint8_t herald_channel,
                           std::uint8_t target_channel, WindowSpec window);

  void push(const TimeTag& tag);
  DoubleCounts finish();
  std::size_t peak_buffered() const { return peak_buffered_; }

 private:
  std::uint8_t herald_ch_, target_ch_;
  std::int64_t lo_, hi_;
  std::deque<std::int64_t> targets_;          // times of recent targets
  std::deque<std::int64_t> pending_heralds_;  // heralds awaiting a target
  DoubleCounts counts_;
  TimeTag last_{};
  bool have_last_ = false;
  std::size_t peak_buffered_ = 0;
};

struct TripleCounts {
  std::uint64_t coincidences = 0;  // heralds with >= 1 A and >= 1 B in window
  std::uint64_t heralds = 0;
};

// Heralded triple-coincidence counter: herald plus at least one tag in each
// of the two target windows; again at most one count per herald.
class TripleCoincidenceCounter {
 public:
  TripleCoincidenceCounter(std::uint8_t herald_channel,
                           std::uint8_t channel_a, WindowSpec window_a,
                           std::uint8_t channel_b, WindowSpec window_b);

  void push(const TimeTag& tag);
  TripleCounts finish();
  std::size_t peak_buffered() const { return peak_buffered_; }

 private:
  struct Pending {
    std::int64_t t;
    bool got_a = false;
    bool got_b = false;
  };
  void target_hit(const TimeTag& tag, bool is_a);

  std::uint8_t herald_ch_, ch_a_, ch_b_;
  std::int64_t lo_a_, hi_a_, lo_b_, hi_b_;
  std::deque<std::int64_t> targets_a_, targets_b_;
  std::deque<Pending> pending_;
  TripleCounts counts_;
  TimeTag last_{};
  bool have_last_ = false;
  std::size_t peak_buffered_ = 0;
};

// One-shot wrappers over the streaming accumulators.
DelayHistogram build_delay_histogram(TagSource& tags,
                                     std::uint8_t herald_channel,
                                     std::uint8_t target_channel,
                                     std::int64_t bin_width_ps,
                                     std::int64_t min_delay_ps,
                                     std::int64_t max_delay_ps);
DoubleCounts count_double(TagSource& tags, std::uint8_t herald_channel,
                          std::uint8_t target_channel, WindowSpec window);
TripleCounts count_triple(TagSource& tags, std::uint8_t herald_channel,
                          std::uint8_t channel_a, WindowSpec window_a,
                          std::uint8_t channel_b, WindowSpec window_b);

// ---------------------------------------------------------------------------
// Estimators
// ---------------------------------------------------------------------------

// Flat-background estimate from the off-peak part of a delay histogram:
// total off-peak counts rescaled to one coincidence-window-sized slice.
// Bins intersecting [exclude_lo, exclude_hi) are dropped. sigma is the
// Poisson error of the off-peak total, rescaled identically. Raises
// DataError when no off-peak bins remain, std::invalid_argument for an
// exclusion interval outside the histogram range or window_width <= 0.
CountWithError estimate_noise(const DelayHistogram& hist,
                              std::int64_t exclude_lo_ps,
                              std::int64_t exclude_hi_ps,
                              std::int64_t window_width_ps);

// numerator/denominator with relative errors combined in quadrature.
// A zero numerator yields 0 +- 0; a nonpositive denominator raises
// std::domain_error.
CountWithError conditional_probability(const CountWithError& numerator,
                                       const CountWithError& denominator);

// Product of two probabilities under the independence hypothesis, again with
// quadrature error propagation; zero factors yield 0 +- 0.
CountWithError independence_product(const CountWithError& p_a,
                                    const CountWithError& p_b);

// Expected accidental triple probability p_n * (p_a + p_b), first-order error
// propagation treating the three inputs as independent.
CountWithError accidental_prediction(const CountWithError& p_n,
                                     const CountWithError& p_a,
                                     const CountWithError& p_b);

// Measured-over-predicted coincidence ratio; < 1 signals antibunching.
// Raises std::domain_error when the prediction is nonpositive.
CountWithError antibunching_ratio(const CountWithError& p_ab,
                                  const CountWithError& product);

// ---------------------------------------------------------------------------
// Whole-stream analysis
// ---------------------------------------------------------------------------

struct AnalysisConfig {
  std::uint8_t herald_channel = kChannelHerald;
  std::uint8_t channel_a = kChannelA;
  std::uint8_t channel_b = kChannelB;
  WindowSpec window_a;
  WindowSpec window_b;
  std::int64_t hist_bin_width_ps = 50;
  // Delay histograms cover window center +- hist_half_span.
  std::int64_t hist_half_span_ps = 10000;
  // Noise is estimated outside center +- peak_exclusion_half_width.
  std::int64_t peak_exclusion_half_width_ps = 5000;
};

// Everything extracted from one pass over one stream.
struct StreamAnalysis {
  std::uint64_t tags_read = 0;
  std::uint64_t heralds = 0;
  std::uint64_t doubles_a = 0;
  std::uint64_t doubles_b = 0;
  std::uint64_t triples = 0;
  DelayHistogram hist_a;
  DelayHistogram hist_b;
  std::size_t peak_buffered = 0;  // max tags buffered by any accumulator
};

// Runs both histograms and all three counters in a single pass; each tag is
// read exactly once and memory stays bounded by the accumulator buffers.
StreamAnalysis analyze_stream(TagSource& tags, const AnalysisConfig& config);

// Measured-rate table plus conditional probabilities for one experiment.
// Rows may come from independent streams (the denominators then differ);
// a single-run analysis simply passes the same StreamAnalysis four times.
// The noise row is estimated from the herald-A delay histogram of `row_n`.
struct ResultsTable {
  CountWithError r_ha, r_h_a, p_a;
  CountWithError r_hb, r_h_b, p_b;
  CountWithError r_hab, r_h_ab, p_11;
  CountWithError r_hn, r_h_n, p_n;
  std::string separation;  // "SL", "TL", or "LL"
};

ResultsTable build_results_table(const StreamAnalysis& row_a,
                                 const StreamAnalysis& row_b,
                                 const StreamAnalysis& row_ab,
                                 const StreamAnalysis& row_n,
                                 const AnalysisConfig& config,
                                 std::string separation_label);

}  // namespace antibunch
