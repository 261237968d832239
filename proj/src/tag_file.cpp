#include "antibunch/tag_file.hpp"

#include <algorithm>
#include <cstring>
#include <ostream>
#include <string>

#include "antibunch/errors.hpp"

namespace antibunch {

namespace {

constexpr std::size_t kWriteBufferBytes = 64 * 1024;
constexpr unsigned char kMagic[4] = {'P', 'T', 'A', 'G'};
constexpr unsigned char kVersion = 0x01;

void put_u32le(unsigned char* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<unsigned char>(v >> (8 * i));
}

void put_u64le(unsigned char* p, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) p[i] = static_cast<unsigned char>(v >> (8 * i));
}

std::uint64_t get_u64le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

void encode_header(unsigned char (&raw)[kTagFileHeaderSize],
                   const TagFileHeader& header) {
  std::memcpy(raw, kMagic, 4);
  raw[4] = kVersion;
  raw[5] = raw[6] = raw[7] = 0;
  put_u32le(raw + 8, header.resolution_ps);
  raw[12] = header.channel_count;
  raw[13] = 0;
}

}  // namespace

TagFileWriter::TagFileWriter(const std::filesystem::path& path,
                             const TagFileHeader& header) {
  file_ = std::fopen(path.string().c_str(), "wb");
  if (!file_) throw IoError("cannot open for writing: " + path.string());
  buffer_.reserve(kWriteBufferBytes + kTagRecordSize);

  unsigned char raw[kTagFileHeaderSize];
  encode_header(raw, header);
  if (std::fwrite(raw, 1, sizeof raw, file_) != sizeof raw) {
    std::fclose(file_);
    file_ = nullptr;
    throw IoError("short write of header: " + path.string());
  }
}

TagFileWriter::~TagFileWriter() {
  if (file_) {
    // Destructor must not throw; explicit close() reports errors.
    try {
      close();
    } catch (...) {
    }
  }
}

void TagFileWriter::append(const TimeTag& tag) {
  if (have_last_ && tag_before(tag, last_)) {
    throw DataError("tag stream out of order at record " +
                    std::to_string(count_));
  }
  last_ = tag;
  have_last_ = true;

  unsigned char raw[kTagRecordSize];
  put_u64le(raw, tag.t_ps);
  raw[8] = tag.channel;
  buffer_.insert(buffer_.end(), raw, raw + kTagRecordSize);
  ++count_;
  if (buffer_.size() >= kWriteBufferBytes) {
    if (std::fwrite(buffer_.data(), 1, buffer_.size(), file_) !=
        buffer_.size()) {
      throw IoError("short write of tag records");
    }
    buffer_.clear();
  }
}

void TagFileWriter::close() {
  if (!file_) return;
  bool ok = true;
  if (!buffer_.empty()) {
    ok = std::fwrite(buffer_.data(), 1, buffer_.size(), file_) ==
         buffer_.size();
    buffer_.clear();
  }
  ok = (std::fflush(file_) == 0) && ok;
  ok = (std::fclose(file_) == 0) && ok;
  file_ = nullptr;
  if (!ok) throw IoError("failed to flush tag file");
}

TagFileReader::TagFileReader(const std::filesystem::path& path) : path_(path) {
  file_ = std::fopen(path.string().c_str(), "rb");
  if (!file_) throw IoError("cannot open for reading: " + path.string());

  unsigned char raw[kTagFileHeaderSize];
  const std::size_t got = std::fread(raw, 1, sizeof raw, file_);
  if (got != sizeof raw) {
    std::fclose(file_);
    file_ = nullptr;
    throw DataError("truncated header (" + std::to_string(got) + " of " +
                    std::to_string(kTagFileHeaderSize) + " bytes): " +
                    path.string());
  }
  if (std::memcmp(raw, kMagic, 4) != 0) {
    std::fclose(file_);
    file_ = nullptr;
    throw DataError("bad magic: " + path.string());
  }
  if (raw[4] != kVersion) {
    std::fclose(file_);
    file_ = nullptr;
    throw DataError("unsupported format version " + std::to_string(raw[4]) +
                    ": " + path.string());
  }
  header_.resolution_ps = static_cast<std::uint32_t>(raw[8]) |
                          static_cast<std::uint32_t>(raw[9]) << 8 |
                          static_cast<std::uint32_t>(raw[10]) << 16 |
                          static_cast<std::uint32_t>(raw[11]) << 24;
  header_.channel_count = raw[12];
  buffer_.resize(kBufferRecords * kTagRecordSize);
}

TagFileReader::~TagFileReader() {
  if (file_) std::fclose(file_);
}

std::size_t TagFileReader::read(TimeTag* out, std::size_t capacity) {
  std::size_t produced = 0;
  while (produced < capacity) {
    if (buf_len_ - buf_pos_ < kTagRecordSize) {
      // Shift the (at most partial) trailing record and refill.
      const std::size_t tail = buf_len_ - buf_pos_;
      std::memmove(buffer_.data(), buffer_.data() + buf_pos_, tail);
      file_offset_ += buf_pos_;
      buf_pos_ = 0;
      buf_len_ = tail;
      const std::size_t got = std::fread(buffer_.data() + tail, 1,
                                         buffer_.size() - tail, file_);
      if (std::ferror(file_)) throw IoError("read error: " + path_.string());
      buf_len_ += got;
      if (buf_len_ < kTagRecordSize) {
        if (buf_len_ != 0) {
          throw DataError("truncated record at byte offset " +
                          std::to_string(file_offset_) + ": " + path_.string());
        }
        break;  // clean end of file
      }
    }

    TimeTag tag;
    tag.t_ps = get_u64le(buffer_.data() + buf_pos_);
    tag.channel = buffer_[buf_pos_ + 8];
    if (have_last_ && tag_before(tag, last_)) {
      throw DataError("tags out of order at byte offset " +
                      std::to_string(file_offset_ + buf_pos_) + ": " +
                      path_.string());
    }
    last_ = tag;
    have_last_ = true;
    buf_pos_ += kTagRecordSize;
    out[produced++] = tag;
  }
  return produced;
}

std::uint64_t write_tags(const std::filesystem::path& path,
                         const TagFileHeader& header, TagSource& tags) {
  TagFileWriter writer(path, header);
  TimeTag block[4096];
  std::size_t n;
  while ((n = tags.read(block, std::size(block))) != 0) {
    for (std::size_t i = 0; i < n; ++i) writer.append(block[i]);
  }
  writer.close();
  return writer.count();
}

std::uint64_t write_tags(const std::filesystem::path& path,
                         const TagFileHeader& header,
                         std::span<const TimeTag> tags) {
  SpanTagSource source(tags);
  return write_tags(path, header, source);
}

std::pair<TagFileHeader, std::vector<TimeTag>> read_tags(
    const std::filesystem::path& path) {
  TagFileReader reader(path);
  std::vector<TimeTag> tags;
  TimeTag block[4096];
  std::size_t n;
  while ((n = reader.read(block, std::size(block))) != 0) {
    tags.insert(tags.end(), block, block + n);
  }
  return {reader.header(), std::move(tags)};
}

bool MergeTagSource::Input::refill() {
  if (pos < buffer.size()) return true;
  buffer.resize(4096);
  const std::size_t n = source->read(buffer.data(), buffer.size());
  buffer.resize(n);
  pos = 0;
  return n != 0;
}

MergeTagSource::MergeTagSource(std::vector<TagSource*> inputs) {
  inputs_.reserve(inputs.size());
  for (TagSource* s : inputs) inputs_.push_back(Input{s, {}, 0, {}, false});
}

// Smallest head among the inputs; false when all are exhausted. With a
// handful of channels a linear scan beats a heap.
bool MergeTagSource::top_of(std::size_t& best) {
  bool found = false;
  for (std::size_t i = 0; i < inputs_.size(); ++i) {
    Input& in = inputs_[i];
    if (!in.refill()) continue;
    if (!found || tag_before(in.buffer[in.pos], inputs_[best].buffer[inputs_[best].pos])) {
      best = i;
      found = true;
    }
  }
  return found;
}

std::size_t MergeTagSource::read(TimeTag* out, std::size_t capacity) {
  std::size_t produced = 0;
  std::size_t best = 0;
  while (produced < capacity && top_of(best)) {
    Input& in = inputs_[best];
    const TimeTag tag = in.buffer[in.pos++];
    if (in.have_last && tag_before(tag, in.last)) {
      throw DataError("merge input " + std::to_string(best) +
                      " is not sorted");
    }
    in.last = tag;
    in.have_last = true;
    out[produced++] = tag;
  }
  return produced;
}

std::vector<TimeTag> merge_channels(
    const std::vector<std::span<const TimeTag>>& streams) {
  std::vector<SpanTagSource> sources;
  sources.reserve(streams.size());
  for (const auto& s : streams) sources.emplace_back(s);
  std::vector<TagSource*> inputs;
  inputs.reserve(sources.size());
  std::size_t total = 0;
  for (auto& s : sources) inputs.push_back(&s);
  for (const auto& s : streams) total += s.size();

  MergeTagSource merged(std::move(inputs));
  std::vector<TimeTag> out;
  out.reserve(total);
  TimeTag block[4096];
  std::size_t n;
  while ((n = merged.read(block, std::size(block))) != 0) {
    out.insert(out.end(), block, block + n);
  }
  return out;
}

void write_tags_text(TagSource& tags, std::ostream& os) {
  TimeTag block[4096];
  std::size_t n;
  while ((n = tags.read(block, std::size(block))) != 0) {
    for (std::size_t i = 0; i < n; ++i) {
      os << block[i].t_ps << ',' << unsigned(block[i].channel) << '\n';
    }
  }
}

}  // namespace antibunch
