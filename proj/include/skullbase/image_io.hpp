#ifndef SKULLBASE_IMAGE_IO_HPP
#define SKULLBASE_IMAGE_IO_HPP

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "skullbase/core.hpp"
#include "skullbase/hmap.hpp"

namespace skullbase {

struct Rgb8 {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb8&, const Rgb8&) = default;
};

/// Raw decoded raster; `bit_depth` is 8 or 16.
struct RawImage {
  std::size_t height = 0;
  std::size_t width = 0;
  int channels = 1;
  int bit_depth = 8;
  std::vector<std::uint16_t> samples;  // row-major, interleaved channels
};

namespace detail {

inline bool has_png_signature(const std::vector<std::uint8_t>& bytes) {
  static constexpr std::array<std::uint8_t, 8> sig = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  return bytes.size() >= sig.size() && std::equal(sig.begin(), sig.end(), bytes.begin());
}

inline RawImage decode_png(const std::vector<std::uint8_t>& bytes) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::UnsupportedFormat, std::string("unreadable PNG: ") + image.message);
  }
  RawImage raw;
  raw.height = image.height;
  raw.width = image.width;
  const bool sixteen = (image.format & PNG_FORMAT_FLAG_LINEAR) != 0;
  raw.bit_depth = sixteen ? 16 : 8;
  raw.channels = ((image.format & PNG_FORMAT_FLAG_COLOR) ? 3 : 1) + ((image.format & PNG_FORMAT_FLAG_ALPHA) ? 1 : 0);
  // Read in the file's own layout so no colour conversion happens.
  image.format &= ~static_cast<png_uint_32>(PNG_FORMAT_FLAG_COLORMAP);
  const std::size_t count = raw.height * raw.width * static_cast<std::size_t>(raw.channels);
  if (sixteen) {
    std::vector<png_uint_16> buf(count);
    if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
      throw Error(ErrorCode::UnsupportedFormat, std::string("PNG decode failed: ") + image.message);
    }
    raw.samples.assign(buf.begin(), buf.end());
  } else {
    std::vector<png_byte> buf(count);
    if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
      throw Error(ErrorCode::UnsupportedFormat, std::string("PNG decode failed: ") + image.message);
    }
    raw.samples.assign(buf.begin(), buf.end());
  }
  return raw;
}

inline RawImage decode_pgm(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 2;
  auto next_int = [&]() -> long {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    long v = 0;
    bool any = false;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos] - '0');
      if (v > 1'000'000) throw Error(ErrorCode::UnsupportedFormat, "PGM header value too large");
      ++pos;
      any = true;
    }
    if (!any) throw Error(ErrorCode::UnsupportedFormat, "malformed PGM header");
    return v;
  };
  RawImage raw;
  raw.width = static_cast<std::size_t>(next_int());
  raw.height = static_cast<std::size_t>(next_int());
  const long maxval = next_int();
  if (maxval < 1 || maxval > 65535) throw Error(ErrorCode::UnsupportedFormat, "PGM maxval out of range");
  ++pos;  // single whitespace before the raster
  raw.bit_depth = maxval < 256 ? 8 : 16;
  const std::size_t bps = raw.bit_depth / 8;
  const std::size_t count = raw.width * raw.height;
  if (bytes.size() < pos + count * bps) throw Error(ErrorCode::UnsupportedFormat, "truncated PGM raster");
  raw.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    raw.samples[i] = bps == 1 ? bytes[pos + i]
                              : static_cast<std::uint16_t>((bytes[pos + 2 * i] << 8) | bytes[pos + 2 * i + 1]);
    if (raw.samples[i] > maxval) throw Error(ErrorCode::UnsupportedFormat, "PGM sample exceeds maxval");
  }
  // Scale to the full range of the declared depth so callers divide by 255/65535.
  if (maxval != 255 && maxval != 65535) {
    const double full = raw.bit_depth == 8 ? 255.0 : 65535.0;
    for (auto& s : raw.samples) s = static_cast<std::uint16_t>(std::lround(s * full / maxval));
  }
  return raw;
}

}  // namespace detail

inline RawImage read_raw_image(const std::filesystem::path& path) {
  const auto bytes = detail::read_file_bytes(path, ErrorCode::IoError);
  if (detail::has_png_signature(bytes)) return detail::decode_png(bytes);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return detail::decode_pgm(bytes);
  throw Error(ErrorCode::UnsupportedFormat, path.string() + " is neither PNG nor binary PGM");
}

/// Loads an 8- or 16-bit single-channel PNG/PGM; intensities are divided by
/// the largest value representable at that depth.
inline SliceImage load_image(const std::filesystem::path& path, Spacing spacing = {}, std::string patient_id = {},
                             std::string scan_id = {}) {
  const RawImage raw = read_raw_image(path);
  if (raw.channels != 1) {
    throw Error(ErrorCode::UnsupportedFormat, path.string() + " has " + std::to_string(raw.channels) +
                                                  " channels; expected single-channel grayscale");
  }
  if (raw.height > raw.width) {
    throw Error(ErrorCode::NotLandscape, path.string() + " is taller than wide");
  }
  const double full = raw.bit_depth == 16 ? 65535.0 : 255.0;
  Grid<double> px(raw.height, raw.width);
  for (std::size_t i = 0; i < raw.samples.size(); ++i) px.data()[i] = raw.samples[i] / full;
  return SliceImage(std::move(px), spacing, std::move(patient_id), std::move(scan_id));
}

/// 16-bit grayscale PNG, intensities quantized to round(v * 65535).
inline void write_png_gray16(const Grid<double>& pixels, const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(pixels.width());
  image.height = static_cast<png_uint_32>(pixels.height());
  image.format = PNG_FORMAT_LINEAR_Y;
  std::vector<png_uint_16> buf(pixels.data().size());
  for (std::size_t i = 0; i < buf.size(); ++i) {
    buf[i] = static_cast<png_uint_16>(std::lround(std::clamp(pixels.data()[i], 0.0, 1.0) * 65535.0));
  }
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, buf.data(), 0, nullptr)) {
    throw Error(ErrorCode::IoError, "cannot write PNG " + path.string() + ": " + image.message);
  }
}

inline void write_png_gray8(const Grid<std::uint8_t>& pixels, const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(pixels.width());
  image.height = static_cast<png_uint_32>(pixels.height());
  image.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, pixels.data().data(), 0, nullptr)) {
    throw Error(ErrorCode::IoError, "cannot write PNG " + path.string() + ": " + image.message);
  }
}

inline void write_png_rgb8(const Grid<Rgb8>& pixels, const std::filesystem::path& path) {
  static_assert(sizeof(Rgb8) == 3);
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(pixels.width());
  image.height = static_cast<png_uint_32>(pixels.height());
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, pixels.data().data(), 0, nullptr)) {
    throw Error(ErrorCode::IoError, "cannot write PNG " + path.string() + ": " + image.message);
  }
}

}  // namespace skullbase

#endif  // SKULLBASE_IMAGE_IO_HPP
