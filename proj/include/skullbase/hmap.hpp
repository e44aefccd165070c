#ifndef SKULLBASE_HMAP_HPP
#define SKULLBASE_HMAP_HPP

// HMAP heatmap container. All integers little-endian.
//
//   offset  size  field
//   0       4     magic "HMAP"
//   4       4     u32 version (= 1)
//   8       4     u32 channels
//   12      4     u32 height
//   16      4     u32 width
//   20      4*C*H*W  f32 IEEE-754, channel-major, row-major within a channel
//   ...     per channel: u16 byte length + UTF-8 name
//
// The file must end exactly after the name table.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "skullbase/heatmap.hpp"

namespace skullbase {

inline constexpr std::uint32_t kHmapVersion = 1;
inline constexpr std::size_t kHmapHeaderBytes = 20;

struct HmapHeader {
  std::uint32_t version = kHmapVersion;
  std::uint32_t channels = 0;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
};

namespace detail {

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

class ByteReader {
 public:
  explicit ByteReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw Error(ErrorCode::CorruptFile, std::string("truncated HMAP file while reading ") + what);
    }
  }
  std::uint16_t u16(const char* what) {
    need(2, what);
    std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::string str(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path, ErrorCode missing) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(missing, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

}  // namespace detail

/// Serializes a stack; values are stored as float32.
inline std::vector<std::uint8_t> encode_hmap(const HeatmapStack& stack) {
  if (stack.names.size() != stack.channels.size()) {
    throw Error(ErrorCode::InvalidArgument, "HMAP needs one name per channel (" +
                                                std::to_string(stack.names.size()) + " names, " +
                                                std::to_string(stack.channels.size()) + " channels)");
  }
  std::set<std::string> unique(stack.names.begin(), stack.names.end());
  if (unique.size() != stack.names.size()) {
    throw Error(ErrorCode::InvalidArgument, "HMAP channel names must be unique");
  }
  const std::size_t h = stack.empty() ? 0 : stack.channels.front().height();
  const std::size_t w = stack.empty() ? 0 : stack.channels.front().width();
  for (const auto& ch : stack.channels) {
    if (ch.height() != h || ch.width() != w) {
      throw Error(ErrorCode::InvalidArgument, "HMAP channels must share dimensions");
    }
  }
  std::vector<std::uint8_t> out;
  out.reserve(kHmapHeaderBytes + 4 * stack.size() * h * w);
  for (char c : std::string_view("HMAP")) out.push_back(static_cast<std::uint8_t>(c));
  detail::put_u32(out, kHmapVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(stack.size()));
  detail::put_u32(out, static_cast<std::uint32_t>(h));
  detail::put_u32(out, static_cast<std::uint32_t>(w));
  for (const auto& ch : stack.channels) {
    for (double v : ch.data()) detail::put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  for (const auto& name : stack.names) {
    if (name.size() > 0xFFFF) throw Error(ErrorCode::InvalidArgument, "channel name too long");
    detail::put_u16(out, static_cast<std::uint16_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
  }
  return out;
}

inline HmapHeader parse_hmap_header(detail::ByteReader& in) {
  const std::string magic = in.str(4, "magic");
  if (magic != "HMAP") throw Error(ErrorCode::CorruptFile, "bad HMAP magic");
  HmapHeader hdr;
  hdr.version = in.u32("version");
  if (hdr.version != kHmapVersion) {
    throw Error(ErrorCode::UnsupportedVersion, "HMAP version " + std::to_string(hdr.version));
  }
  hdr.channels = in.u32("channels");
  hdr.height = in.u32("height");
  hdr.width = in.u32("width");
  return hdr;
}

inline HeatmapStack decode_hmap(const std::vector<std::uint8_t>& bytes) {
  detail::ByteReader in(bytes);
  const HmapHeader hdr = parse_hmap_header(in);
  const std::uint64_t cells = std::uint64_t{hdr.channels} * hdr.height * hdr.width;
  if (cells * 4 > in.remaining()) {
    throw Error(ErrorCode::CorruptFile, "HMAP payload shorter than header declares");
  }
  HeatmapStack stack;
  stack.channels.reserve(hdr.channels);
  for (std::uint32_t c = 0; c < hdr.channels; ++c) {
    Heatmap hm(hdr.height, hdr.width);
    for (double& v : hm.data()) {
      const float f = std::bit_cast<float>(in.u32("payload"));
      if (!std::isfinite(f)) throw Error(ErrorCode::CorruptFile, "HMAP payload holds non-finite values");
      v = f;
    }
    stack.channels.push_back(std::move(hm));
  }
  std::set<std::string> seen;
  for (std::uint32_t c = 0; c < hdr.channels; ++c) {
    const std::uint16_t len = in.u16("name length");
    std::string name = in.str(len, "name");
    if (!seen.insert(name).second) throw Error(ErrorCode::CorruptFile, "duplicate HMAP channel name " + name);
    stack.names.push_back(std::move(name));
  }
  if (in.remaining() != 0) {
    throw Error(ErrorCode::CorruptFile, "HMAP file has " + std::to_string(in.remaining()) + " trailing bytes");
  }
  return stack;
}

inline void write_hmap(const HeatmapStack& stack, const std::filesystem::path& path) {
  detail::write_file_bytes(path, encode_hmap(stack));
}

inline HeatmapStack read_hmap(const std::filesystem::path& path) {
  return decode_hmap(detail::read_file_bytes(path, ErrorCode::IoError));
}

}  // namespace skullbase

#endif  // SKULLBASE_HMAP_HPP
