#include "antibunch/coincidence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "antibunch/errors.hpp"

namespace antibunch {

namespace {

std::int64_t as_time(const TimeTag& tag) {
  return static_cast<std::int64_t>(tag.t_ps);
}

void check_window(const WindowSpec& w, const char* who) {
  if (w.width_ps <= 0) {
    throw std::invalid_argument(std::string(who) + ": window width must be > 0");
  }
}

[[noreturn]] void throw_unsorted(const TimeTag& tag) {
  throw DataError("tag stream out of order at t=" + std::to_string(tag.t_ps) +
                  " channel=" + std::to_string(tag.channel));
}

}  // namespace

std::uint64_t DelayHistogram::total() const {
  std::uint64_t sum = 0;
  for (std::uint64_t c : counts) sum += c;
  return sum;
}

CountWithError CountWithError::from_count(double n) {
  return {n, std::sqrt(n)};
}

// ---------------------------------------------------------------------------
// DelayHistogrammer
// ---------------------------------------------------------------------------

DelayHistogrammer::DelayHistogrammer(std::uint8_t herald_channel,
                                     std::uint8_t target_channel,
                                     std::int64_t bin_width_ps,
                                     std::int64_t min_delay_ps,
                                     std::int64_t max_delay_ps)
    : herald_ch_(herald_channel), target_ch_(target_channel) {
  if (bin_width_ps <= 0) {
    throw std::invalid_argument("histogram: bin width must be > 0");
  }
  if (max_delay_ps <= min_delay_ps) {
    throw std::invalid_argument("histogram: empty delay range");
  }
  if ((max_delay_ps - min_delay_ps) % bin_width_ps != 0) {
    throw std::invalid_argument(
        "histogram: range must be a whole number of bins");
  }
  hist_.bin_width_ps = bin_width_ps;
  hist_.min_delay_ps = min_delay_ps;
  hist_.max_delay_ps = max_delay_ps;
  hist_.counts.assign(
      static_cast<std::size_t>((max_delay_ps - min_delay_ps) / bin_width_ps),
      0);
}

void DelayHistogrammer::order_check(const TimeTag& tag) {
  if (have_last_ && tag_before(tag, last_)) throw_unsorted(tag);
  last_ = tag;
  have_last_ = true;
}

void DelayHistogrammer::note_buffered() {
  peak_buffered_ = std::max(peak_buffered_, heralds_.size() + targets_.size());
}

void DelayHistogrammer::push(const TimeTag& tag) {
  order_check(tag);
  const std::int64_t t = as_time(tag);

  // A herald is dead once even the current tag sits past the delay range;
  // a target is dead once every future herald would undershoot it.
  while (!heralds_.empty() &&
         t - static_cast<std::int64_t>(heralds_.front()) >= hist_.max_delay_ps) {
    heralds_.pop_front();
  }
  while (!targets_.empty() &&
         static_cast<std::int64_t>(targets_.front()) - t < hist_.min_delay_ps) {
    targets_.pop_front();
  }

  // Pair with the buffers before inserting the tag itself, so in
  // autocorrelation mode (herald channel == target channel) a tag never
  // pairs with itself, while both orderings of distinct equal-time tags
  // still count.
  const bool is_target = tag.channel == target_ch_;
  const bool is_herald = tag.channel == herald_ch_;
  if (is_target) {
    // Pair with earlier heralds; delays shrink front-to-back, so stop at the
    // first one below the range.
    for (std::uint64_t h : heralds_) {
      const std::int64_t delay = t - static_cast<std::int64_t>(h);
      if (delay < hist_.min_delay_ps) break;
      ++hist_.counts[static_cast<std::size_t>(
          (delay - hist_.min_delay_ps) / hist_.bin_width_ps)];
    }
  }
  if (is_herald) {
    // Pair with earlier targets; delays grow front-to-back, so stop at the
    // first one at or past the range end.
    for (std::uint64_t u : targets_) {
      const std::int64_t delay = static_cast<std::int64_t>(u) - t;
      if (delay >= hist_.max_delay_ps) break;
      ++hist_.counts[static_cast<std::size_t>(
          (delay - hist_.min_delay_ps) / hist_.bin_width_ps)];
    }
  }
  if (is_target) targets_.push_back(tag.t_ps);
  if (is_herald) heralds_.push_back(tag.t_ps);
  note_buffered();
}

const DelayHistogram& DelayHistogrammer::finish() {
  heralds_.clear();
  targets_.clear();
  return hist_;
}

// ---------------------------------------------------------------------------
// DoubleCoincidenceCounter
// ---------------------------------------------------------------------------

DoubleCoincidenceCounter::DoubleCoincidenceCounter(std::uint8_t herald_channel,
                                                   std::uint8_t target_channel,
                                                   WindowSpec window)
    : herald_ch_(herald_channel),
      target_ch_(target_channel),
      lo_(window.lo()),
      hi_(window.hi()) {
  check_window(window, "count_double");
  if (herald_channel == target_channel) {
    throw std::invalid_argument("count_double: channels must differ");
  }
}

void DoubleCoincidenceCounter::push(const TimeTag& tag) {
  if (have_last_ && tag_before(tag, last_)) throw_unsorted(tag);
  last_ = tag;
  have_last_ = true;
  const std::int64_t t = as_time(tag);

  // Targets below t+lo can never serve a future herald; pending heralds whose
  // window closed at or before t can never be satisfied.
  while (!targets_.empty() && targets_.front() < t + lo_) targets_.pop_front();
  while (!pending_heralds_.empty() && pending_heralds_.front() + hi_ <= t) {
    pending_heralds_.pop_front();
  }

  if (tag.channel == target_ch_) {
    // This target satisfies exactly the pending heralds h with
    // t in [h+lo, h+hi), a prefix of the (ascending) pending queue.
    while (!pending_heralds_.empty() && pending_heralds_.front() + lo_ <= t) {
      ++counts_.coincidences;
      pending_heralds_.pop_front();
    }
    targets_.push_back(t);
  } else if (tag.channel == herald_ch_) {
    ++counts_.heralds;
    // After eviction the oldest buffered target is >= t+lo, so one front
    // probe decides whether the window is already satisfied.
    if (!targets_.empty() && targets_.front() < t + hi_) {
      ++counts_.coincidences;
    } else {
      pending_heralds_.push_back(t);
    }
  }
  peak_buffered_ =
      std::max(peak_buffered_, targets_.size() + pending_heralds_.size());
}

DoubleCounts DoubleCoincidenceCounter::finish() {
  targets_.clear();
  pending_heralds_.clear();
  return counts_;
}

// ---------------------------------------------------------------------------
// TripleCoincidenceCounter
// ---------------------------------------------------------------------------

TripleCoincidenceCounter::TripleCoincidenceCounter(
    std::uint8_t herald_channel, std::uint8_t channel_a, WindowSpec window_a,
    std::uint8_t channel_b, WindowSpec window_b)
    : herald_ch_(herald_channel),
      ch_a_(channel_a),
      ch_b_(channel_b),
      lo_a_(window_a.lo()),
      hi_a_(window_a.hi()),
      lo_b_(window_b.lo()),
      hi_b_(window_b.hi()) {
  check_window(window_a, "count_triple");
  check_window(window_b, "count_triple");
  if (herald_channel == channel_a || herald_channel == channel_b ||
      channel_a == channel_b) {
    throw std::invalid_argument("count_triple: channels must differ");
  }
}

void TripleCoincidenceCounter::target_hit(const TimeTag& tag, bool is_a) {
  const std::int64_t t = as_time(tag);
  const std::int64_t lo = is_a ? lo_a_ : lo_b_;
  const std::int64_t hi = is_a ? hi_a_ : hi_b_;

  // Heralds h with t in [h+lo, h+hi) are a contiguous run of the pending
  // queue, but heralds whose *other* window is still open may precede it.
  for (auto it = pending_.begin(); it != pending_.end();) {
    if (it->t + lo > t) break;       // this and all later heralds: too recent
    if (it->t + hi <= t) {           // window closed; other window keeps it
      ++it;
      continue;
    }
    bool& got = is_a ? it->got_a : it->got_b;
    got = true;
    if (it->got_a && it->got_b) {
      ++counts_.coincidences;
      it = pending_.erase(it);
      continue;
    }
    ++it;
  }
  (is_a ? targets_a_ : targets_b_).push_back(t);
}

void TripleCoincidenceCounter::push(const TimeTag& tag) {
  if (have_last_ && tag_before(tag, last_)) throw_unsorted(tag);
  last_ = tag;
  have_last_ = true;
  const std::int64_t t = as_time(tag);

  while (!targets_a_.empty() && targets_a_.front() < t + lo_a_) {
    targets_a_.pop_front();
  }
  while (!targets_b_.empty() && targets_b_.front() < t + lo_b_) {
    targets_b_.pop_front();
  }
  const std::int64_t last_close = std::max(hi_a_, hi_b_);
  while (!pending_.empty() && pending_.front().t + last_close <= t) {
    pending_.pop_front();
  }

  if (tag.channel == ch_a_ || tag.channel == ch_b_) {
    target_hit(tag, tag.channel == ch_a_);
  } else if (tag.channel == herald_ch_) {
    ++counts_.heralds;
    Pending p{t, false, false};
    if (!targets_a_.empty() && targets_a_.front() < t + hi_a_) p.got_a = true;
    if (!targets_b_.empty() && targets_b_.front() < t + hi_b_) p.got_b = true;
    if (p.got_a && p.got_b) {
      ++counts_.coincidences;
    } else {
      pending_.push_back(p);
    }
  }
  peak_buffered_ = std::max(
      peak_buffered_,
      targets_a_.size() + targets_b_.size() + pending_.size());
}

TripleCounts TripleCoincidenceCounter::finish() {
  targets_a_.clear();
  targets_b_.clear();
  pending_.clear();
  return counts_;
}

// ---------------------------------------------------------------------------
// One-shot wrappers
// ---------------------------------------------------------------------------

namespace {

template <typename Accumulator>
void drain(TagSource& tags, Accumulator& acc) {
  TimeTag block[8192];
  std::size_t n;
  while ((n = tags.read(block, std::size(block))) != 0) {
    for (std::size_t i = 0; i < n; ++i) acc.push(block[i]);
  }
}

}  // namespace

DelayHistogram build_delay_histogram(TagSource& tags,
                                     std::uint8_t herald_channel,
                                     std::uint8_t target_channel,
                                     std::int64_t bin_width_ps,
                                     std::int64_t min_delay_ps,
                                     std::int64_t max_delay_ps) {
  DelayHistogrammer h(herald_channel, target_channel, bin_width_ps,
                      min_delay_ps, max_delay_ps);
  drain(tags, h);
  return h.finish();
}

DoubleCounts count_double(TagSource& tags, std::uint8_t herald_channel,
                          std::uint8_t target_channel, WindowSpec window) {
  DoubleCoincidenceCounter c(herald_channel, target_channel, window);
  drain(tags, c);
  return c.finish();
}

TripleCounts count_triple(TagSource& tags, std::uint8_t herald_channel,
                          std::uint8_t channel_a, WindowSpec window_a,
                          std::uint8_t channel_b, WindowSpec window_b) {
  TripleCoincidenceCounter c(herald_channel, channel_a, window_a, channel_b,
                             window_b);
  drain(tags, c);
  return c.finish();
}

// ---------------------------------------------------------------------------
// Estimators
// ---------------------------------------------------------------------------

CountWithError estimate_noise(const DelayHistogram& hist,
                              std::int64_t exclude_lo_ps,
                              std::int64_t exclude_hi_ps,
                              std::int64_t window_width_ps) {
  if (window_width_ps <= 0) {
    throw std::invalid_argument("estimate_noise: window width must be > 0");
  }
  if (exclude_lo_ps > exclude_hi_ps) {
    throw std::invalid_argument("estimate_noise: inverted exclusion interval");
  }
  if (exclude_lo_ps < hist.min_delay_ps || exclude_hi_ps > hist.max_delay_ps) {
    throw std::invalid_argument(
        "estimate_noise: exclusion interval outside histogram range");
  }

  std::uint64_t off_total = 0;
  std::int64_t off_bins = 0;
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    const std::int64_t lo = hist.bin_start(i);
    const std::int64_t hi = lo + hist.bin_width_ps;
    const bool touches_peak = lo < exclude_hi_ps && exclude_lo_ps < hi;
    if (touches_peak) continue;
    off_total += hist.counts[i];
    ++off_bins;
  }
  if (off_bins == 0) {
    throw DataError("estimate_noise: no off-peak bins outside the exclusion");
  }

  const double scale =
      static_cast<double>(window_width_ps) /
      (static_cast<double>(off_bins) * static_cast<double>(hist.bin_width_ps));
  return {static_cast<double>(off_total) * scale,
          std::sqrt(static_cast<double>(off_total)) * scale};
}

CountWithError conditional_probability(const CountWithError& numerator,
                                       const CountWithError& denominator) {
  if (!(denominator.value > 0.0)) {
    throw std::domain_error("conditional_probability: denominator must be > 0");
  }
  if (numerator.value == 0.0) return {0.0, 0.0};
  const double value = numerator.value / denominator.value;
  const double rel_n = numerator.sigma / numerator.value;
  const double rel_d = denominator.sigma / denominator.value;
  return {value, value * std::sqrt(rel_n * rel_n + rel_d * rel_d)};
}

CountWithError independence_product(const CountWithError& p_a,
                                    const CountWithError& p_b) {
  if (p_a.value == 0.0 || p_b.value == 0.0) return {0.0, 0.0};
  const double value = p_a.value * p_b.value;
  const double rel_a = p_a.sigma / p_a.value;
  const double rel_b = p_b.sigma / p_b.value;
  return {value, value * std::sqrt(rel_a * rel_a + rel_b * rel_b)};
}

CountWithError accidental_prediction(const CountWithError& p_n,
                                     const CountWithError& p_a,
                                     const CountWithError& p_b) {
  const double sum = p_a.value + p_b.value;
  const double value = p_n.value * sum;
  const double var = (sum * p_n.sigma) * (sum * p_n.sigma) +
                     (p_n.value * p_a.sigma) * (p_n.value * p_a.sigma) +
                     (p_n.value * p_b.sigma) * (p_n.value * p_b.sigma);
  return {value, std::sqrt(var)};
}

CountWithError antibunching_ratio(const CountWithError& p_ab,
                                  const CountWithError& product) {
  if (!(product.value > 0.0)) {
    throw std::domain_error("antibunching_ratio: prediction must be > 0");
  }
  if (p_ab.value == 0.0) return {0.0, p_ab.sigma / product.value};
  const double value = p_ab.value / product.value;
  const double rel_n = p_ab.sigma / p_ab.value;
  const double rel_d = product.sigma / product.value;
  return {value, value * std::sqrt(rel_n * rel_n + rel_d * rel_d)};
}

// ---------------------------------------------------------------------------
// Whole-stream analysis
// ---------------------------------------------------------------------------

StreamAnalysis analyze_stream(TagSource& tags, const AnalysisConfig& config) {
  if (config.hist_half_span_ps <= 0 || config.peak_exclusion_half_width_ps < 0) {
    throw std::invalid_argument("analysis: invalid histogram spans");
  }
  if (config.peak_exclusion_half_width_ps > config.hist_half_span_ps) {
    throw std::invalid_argument(
        "analysis: peak exclusion exceeds histogram span");
  }

  DelayHistogrammer hist_a(config.herald_channel, config.channel_a,
                           config.hist_bin_width_ps,
                           config.window_a.center_ps - config.hist_half_span_ps,
                           config.window_a.center_ps + config.hist_half_span_ps);
  DelayHistogrammer hist_b(config.herald_channel, config.channel_b,
                           config.hist_bin_width_ps,
                           config.window_b.center_ps - config.hist_half_span_ps,
                           config.window_b.center_ps + config.hist_half_span_ps);
  DoubleCoincidenceCounter dbl_a(config.herald_channel, config.channel_a,
                                 config.window_a);
  DoubleCoincidenceCounter dbl_b(config.herald_channel, config.channel_b,
                                 config.window_b);
  TripleCoincidenceCounter triple(config.herald_channel, config.channel_a,
                                  config.window_a, config.channel_b,
                                  config.window_b);

  StreamAnalysis out;
  TimeTag block[8192];
  std::size_t n;
  while ((n = tags.read(block, std::size(block))) != 0) {
    for (std::size_t i = 0; i < n; ++i) {
      const TimeTag& tag = block[i];
      hist_a.push(tag);
      hist_b.push(tag);
      dbl_a.push(tag);
      dbl_b.push(tag);
      triple.push(tag);
    }
    out.tags_read += n;
  }

  const DoubleCounts a = dbl_a.finish();
  const DoubleCounts b = dbl_b.finish();
  const TripleCounts t = triple.finish();
  out.heralds = a.heralds;
  out.doubles_a = a.coincidences;
  out.doubles_b = b.coincidences;
  out.triples = t.coincidences;
  out.hist_a = hist_a.finish();
  out.hist_b = hist_b.finish();
  out.peak_buffered =
      std::max({hist_a.peak_buffered(), hist_b.peak_buffered(),
                dbl_a.peak_buffered(), dbl_b.peak_buffered(),
                triple.peak_buffered()});
  return out;
}

ResultsTable build_results_table(const StreamAnalysis& row_a,
                                 const StreamAnalysis& row_b,
                                 const StreamAnalysis& row_ab,
                                 const StreamAnalysis& row_n,
                                 const AnalysisConfig& config,
                                 std::string separation_label) {
  ResultsTable t;
  t.separation = std::move(separation_label);

  t.r_ha = CountWithError::from_count(static_cast<double>(row_a.doubles_a));
  t.r_h_a = CountWithError::from_count(static_cast<double>(row_a.heralds));
  t.p_a = conditional_probability(t.r_ha, t.r_h_a);

  t.r_hb = CountWithError::from_count(static_cast<double>(row_b.doubles_b));
  t.r_h_b = CountWithError::from_count(static_cast<double>(row_b.heralds));
  t.p_b = conditional_probability(t.r_hb, t.r_h_b);

  t.r_hab = CountWithError::from_count(static_cast<double>(row_ab.triples));
  t.r_h_ab = CountWithError::from_count(static_cast<double>(row_ab.heralds));
  t.p_11 = conditional_probability(t.r_hab, t.r_h_ab);

  t.r_hn = estimate_noise(
      row_n.hist_a,
      config.window_a.center_ps - config.peak_exclusion_half_width_ps,
      config.window_a.center_ps + config.peak_exclusion_half_width_ps,
      config.window_a.width_ps);
  t.r_h_n = CountWithError::from_count(static_cast<double>(row_n.heralds));
  t.p_n = conditional_probability(t.r_hn, t.r_h_n);
  return t;
}

}  // namespace antibunch
