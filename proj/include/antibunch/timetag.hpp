#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace antibunch {

// Channel conventions used throughout: 0 = herald, 1 = detector A,
// 2 = detector B.
inline constexpr std::uint8_t kChannelHerald = 0;
inline constexpr std::uint8_t kChannelA = 1;
inline constexpr std::uint8_t kChannelB = 2;

// One TDC output record: quantized click time in picoseconds plus the
// originating channel.
struct TimeTag {
  std::uint64_t t_ps = 0;
  std::uint8_t channel = 0;

  friend bool operator==(const TimeTag&, const TimeTag&) = default;
};

// Canonical stream order: time ascending, ties broken by ascending channel.
inline bool tag_before(const TimeTag& a, const TimeTag& b) {
  if (a.t_ps != b.t_ps) return a.t_ps < b.t_ps;
  return a.channel < b.channel;
}

inline bool is_sorted_stream(std::span<const TimeTag> tags) {
  for (std::size_t i = 1; i < tags.size(); ++i) {
    if (tag_before(tags[i], tags[i - 1])) return false;
  }
  return true;
}

// Pull interface for tag consumers. read() fills up to `capacity` records and
// returns how many were produced; 0 means end of stream. All analysis runs off
// this interface so it never needs a whole stream in memory.
class TagSource {
 public:
  virtual ~TagSource() = default;
  virtual std::size_t read(TimeTag* out, std::size_t capacity) = 0;
};

class SpanTagSource final : public TagSource {
 public:
  explicit SpanTagSource(std::span<const TimeTag> tags) : tags_(tags) {}

  std::size_t read(TimeTag* out, std::size_t capacity) override {
    std::size_t n = 0;
    while (n < capacity && pos_ < tags_.size()) out[n++] = tags_[pos_++];
    return n;
  }

 private:
  std::span<const TimeTag> tags_;
  std::size_t pos_ = 0;
};

}  // namespace antibunch
