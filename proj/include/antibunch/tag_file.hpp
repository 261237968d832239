#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "antibunch/timetag.hpp"

namespace antibunch {

// Binary tag file layout (all integers little-endian):
//   offset  0  "PTAG"            magic
//   offset  4  0x01              format version
//   offset  5  3 reserved bytes  zero
//   offset  8  u32               TDC resolution in ps
//   offset 12  u8                channel count
//   offset 13  1 pad byte        zero
//   offset 14  records           9 bytes each: u64 t_ps, u8 channel
// Records are nondecreasing in time with ties ordered by ascending channel.
// An empty stream is a 14-byte file; one tag (t=50, channel=1) makes 23 bytes.
struct TagFileHeader {
  std::uint32_t resolution_ps = 50;
  std::uint8_t channel_count = 3;
};

inline constexpr std::size_t kTagFileHeaderSize = 14;
inline constexpr std::size_t kTagRecordSize = 9;

// Streaming writer with a fixed-size internal buffer; enforces stream order
// on append (DataError on violation), IoError on filesystem failure.
class TagFileWriter {
 public:
  TagFileWriter(const std::filesystem::path& path, const TagFileHeader& header);
  ~TagFileWriter();
  TagFileWriter(const TagFileWriter&) = delete;
  TagFileWriter& operator=(const TagFileWriter&) = delete;

  void append(const TimeTag& tag);
  std::uint64_t count() const { return count_; }
  void close();  // flush + fclose; called by the destructor if needed

 private:
  std::FILE* file_ = nullptr;
  std::vector<unsigned char> buffer_;
  TimeTag last_{};
  bool have_last_ = false;
  std::uint64_t count_ = 0;
};

// Streaming reader; memory use is one fixed buffer regardless of file size.
// Validates magic/version up front and record order lazily while reading;
// order violations and truncated records raise DataError with the byte
// offset, open failures raise IoError.
class TagFileReader final : public TagSource {
 public:
  static constexpr std::size_t kBufferRecords = 8192;

  explicit TagFileReader(const std::filesystem::path& path);
  ~TagFileReader();
  TagFileReader(const TagFileReader&) = delete;
  TagFileReader& operator=(const TagFileReader&) = delete;

  const TagFileHeader& header() const { return header_; }
  std::size_t buffer_capacity_bytes() const { return buffer_.size(); }

  std::size_t read(TimeTag* out, std::size_t capacity) override;

 private:
  std::FILE* file_ = nullptr;
  std::filesystem::path path_;
  TagFileHeader header_;
  std::vector<unsigned char> buffer_;
  std::size_t buf_len_ = 0;   // valid bytes in buffer_
  std::size_t buf_pos_ = 0;   // consumed bytes in buffer_
  std::uint64_t file_offset_ = kTagFileHeaderSize;  // of buffer_[0]
  TimeTag last_{};
  bool have_last_ = false;
};

// Drains `tags` into a new file; returns the number of records written.
std::uint64_t write_tags(const std::filesystem::path& path,
                         const TagFileHeader& header, TagSource& tags);
std::uint64_t write_tags(const std::filesystem::path& path,
                         const TagFileHeader& header,
                         std::span<const TimeTag> tags);

// Materializing convenience reader.
std::pair<TagFileHeader, std::vector<TimeTag>> read_tags(
    const std::filesystem::path& path);

// K-way merge of sorted per-channel streams into one stream ordered by
// (time, channel); ties across inputs are resolved by channel and then input
// index, making the merge stable. Raises DataError if an input turns out to
// be unsorted mid-merge.
class MergeTagSource final : public TagSource {
 public:
  explicit MergeTagSource(std::vector<TagSource*> inputs);
  std::size_t read(TimeTag* out, std::size_t capacity) override;

 private:
  struct Input {
    TagSource* source;
    std::vector<TimeTag> buffer;
    std::size_t pos = 0;
    TimeTag last{};
    bool have_last = false;
    bool refill();
  };
  bool top_of(std::size_t& best);

  std::vector<Input> inputs_;
};

std::vector<TimeTag> merge_channels(
    const std::vector<std::span<const TimeTag>>& streams);

// Debug export: one "t_ps,channel" line per record.
void write_tags_text(TagSource& tags, std::ostream& os);

}  // namespace antibunch
