#pragma once

// Binary time-tag file, little-endian throughout.
//
//   header (40 bytes)
//     0  char[8] magic "TTAGSTRM"
//     8  u32     version (1)
//    12  u32     resolution in ps (1)
//    16  u32     channel count (largest channel + 1)
//    20  u32     reserved, zero
//    24  u64     duration, ps
//    32  u64     record count
//   records (16 bytes each)
//     0  u64     time, ps
//     8  u8      channel
//     9  u8[7]   reserved, zero

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "qplas/core/types.hpp"

namespace qplas::io {

class TagFileError : public Error {
public:
  enum class Code { BadMagic, BadVersion, BadHeader, Truncated, Unsorted, OutOfRange, Io };

  TagFileError(Code code, const std::string& what, std::uint64_t offset = 0)
      : Error(what), code_(code), offset_(offset) {}

  Code code() const noexcept { return code_; }
  /// Byte offset of the offending record or field.
  std::uint64_t offset() const noexcept { return offset_; }

private:
  Code code_;
  std::uint64_t offset_;
};

inline constexpr std::array<char, 8> kTagFileMagic{'T', 'T', 'A', 'G', 'S', 'T', 'R', 'M'};
inline constexpr std::uint32_t kTagFileVersion = 1;
inline constexpr std::size_t kTagHeaderSize = 40;
inline constexpr std::size_t kTagRecordSize = 16;

namespace detail {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(v) >> (8 * i)));
}

template <typename T>
T get_le(std::span<const std::uint8_t> in, std::size_t at) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(in[at + i]) << (8 * i);
  return static_cast<T>(v);
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_tags(const TimeTagStream& s) {
  std::vector<std::uint8_t> out(kTagFileMagic.begin(), kTagFileMagic.end());
  out.reserve(kTagHeaderSize + kTagRecordSize * s.size());
  detail::put_le<std::uint32_t>(out, kTagFileVersion);
  detail::put_le<std::uint32_t>(out, 1);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.channel_count()));
  detail::put_le<std::uint32_t>(out, 0);
  detail::put_le<std::uint64_t>(out, static_cast<std::uint64_t>(s.duration()));
  detail::put_le<std::uint64_t>(out, s.size());
  for (const auto& t : s.tags()) {
    detail::put_le<std::uint64_t>(out, static_cast<std::uint64_t>(t.time));
    out.push_back(t.channel);
    out.insert(out.end(), 7, 0);
  }
  return out;
}

inline TimeTagStream decode_tags(std::span<const std::uint8_t> in) {
  using Code = TagFileError::Code;
  if (in.size() < kTagHeaderSize) {
    if (in.size() >= 8 && !std::equal(kTagFileMagic.begin(), kTagFileMagic.end(), in.begin()))
      throw TagFileError(Code::BadMagic, "not a tag file: bad magic", 0);
    throw TagFileError(Code::Truncated, "truncated tag file header (" + std::to_string(in.size()) + " bytes)", 0);
  }
  if (!std::equal(kTagFileMagic.begin(), kTagFileMagic.end(), in.begin()))
    throw TagFileError(Code::BadMagic, "not a tag file: bad magic", 0);
  const auto version = detail::get_le<std::uint32_t>(in, 8);
  if (version != kTagFileVersion)
    throw TagFileError(Code::BadVersion, "unsupported tag file version " + std::to_string(version), 8);
  if (detail::get_le<std::uint32_t>(in, 12) != 1)
    throw TagFileError(Code::BadHeader, "unsupported time resolution (only 1 ps)", 12);
  const auto channel_count = detail::get_le<std::uint32_t>(in, 16);
  if (channel_count > 256) throw TagFileError(Code::BadHeader, "channel count exceeds 256", 16);
  const auto duration = detail::get_le<std::uint64_t>(in, 24);
  if (duration > static_cast<std::uint64_t>(INT64_MAX)) throw TagFileError(Code::BadHeader, "duration overflows", 24);
  const auto count = detail::get_le<std::uint64_t>(in, 32);
  const std::uint64_t body = in.size() - kTagHeaderSize;
  if (count > body / kTagRecordSize)
    throw TagFileError(Code::Truncated,
                       "truncated tag file: header promises " + std::to_string(count) + " records, body holds " +
                           std::to_string(body / kTagRecordSize),
                       kTagHeaderSize + (body / kTagRecordSize) * kTagRecordSize);
  if (body != count * kTagRecordSize)
    throw TagFileError(Code::BadHeader, "trailing bytes after the last record", kTagHeaderSize + count * kTagRecordSize);

  std::vector<TimeTag> tags;
  tags.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    const std::size_t at = kTagHeaderSize + k * kTagRecordSize;
    const auto time = detail::get_le<std::uint64_t>(in, at);
    const auto channel = in[at + 8];
    if (time > duration)
      throw TagFileError(Code::OutOfRange, "record " + std::to_string(k) + " lies beyond the stream duration", at);
    if (channel >= channel_count)
      throw TagFileError(Code::OutOfRange, "record " + std::to_string(k) + " has channel outside the header count",
                         at + 8);
    if (!tags.empty() && static_cast<TimePs>(time) < tags.back().time)
      throw TagFileError(Code::Unsorted, "records not sorted by time at record " + std::to_string(k) +
                                             " (byte offset " + std::to_string(at) + ")",
                         at);
    tags.push_back({static_cast<TimePs>(time), channel});
  }
  return TimeTagStream(std::move(tags), static_cast<TimePs>(duration));
}

/// Writes to a sibling temporary file and renames it into place, so a reader
/// never sees a partially written file.
inline void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw TagFileError(TagFileError::Code::Io, "cannot open " + tmp.string() + " for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    f.flush();
    if (!f) throw TagFileError(TagFileError::Code::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw TagFileError(TagFileError::Code::Io, "cannot rename into " + path.string());
  }
}

inline void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw TagFileError(TagFileError::Code::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline void write_tags(const std::filesystem::path& path, const TimeTagStream& s) {
  write_file_atomic(path, encode_tags(s));
}

inline TimeTagStream read_tags(const std::filesystem::path& path) { return decode_tags(read_file_bytes(path)); }

}  // namespace qplas::io
