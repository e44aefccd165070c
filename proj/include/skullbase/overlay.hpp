#ifndef SKULLBASE_OVERLAY_HPP
#define SKULLBASE_OVERLAY_HPP

#include <array>
#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "skullbase/core.hpp"
#include "skullbase/image_io.hpp"
#include "skullbase/pipeline.hpp"

namespace skullbase {

namespace overlay_detail {

constexpr Rgb8 kRed{230, 40, 40};
constexpr Rgb8 kYellow{240, 220, 40};
constexpr Rgb8 kGreen{60, 220, 80};
constexpr Rgb8 kCyan{40, 200, 230};
constexpr Rgb8 kWhite{255, 255, 255};

inline void plot(Grid<Rgb8>& img, long x, long y, Rgb8 c) {
  if (x < 0 || y < 0 || x >= static_cast<long>(img.width()) || y >= static_cast<long>(img.height())) return;
  img(static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = c;
}

inline void line(Grid<Rgb8>& img, Point2 a, Point2 b, Rgb8 c) {
  const double steps = std::max({std::abs(b.x - a.x), std::abs(b.y - a.y), 1.0});
  const int n = static_cast<int>(std::ceil(steps));
  for (int i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    plot(img, std::lround(a.x + (b.x - a.x) * t), std::lround(a.y + (b.y - a.y) * t), c);
  }
}

inline void dot(Grid<Rgb8>& img, Point2 p, Rgb8 c, int radius = 2) {
  const long cx = std::lround(p.x), cy = std::lround(p.y);
  for (long dy = -radius; dy <= radius; ++dy)
    for (long dx = -radius; dx <= radius; ++dx)
      if (dx * dx + dy * dy <= radius * radius) plot(img, cx + dx, cy + dy, c);
}

// 3x5 glyphs, rows top to bottom, 3 bits per row (MSB = left column).
inline std::array<std::uint8_t, 5> glyph(char ch) {
  switch (ch) {
    case 'I': return {7, 2, 2, 2, 7};
    case 'K': return {5, 5, 6, 5, 5};
    case 'G': return {7, 4, 5, 5, 7};
    case 'T': return {7, 2, 2, 2, 2};
    case 'L': return {4, 4, 4, 4, 7};
    case 'R': return {6, 5, 6, 5, 5};
    case '-': return {0, 0, 7, 0, 0};
    case ':': return {0, 2, 0, 2, 0};
    case '?': return {7, 1, 2, 0, 2};
    default: return {0, 0, 0, 0, 0};
  }
}

inline void text(Grid<Rgb8>& img, long x, long y, std::string_view s, Rgb8 c, int scale = 2) {
  for (char ch : s) {
    const auto g = glyph(ch);
    for (int r = 0; r < 5; ++r)
      for (int col = 0; col < 3; ++col)
        if (g[r] & (4 >> col))
          for (int sy = 0; sy < scale; ++sy)
            for (int sx = 0; sx < scale; ++sx) plot(img, x + (col * scale) + sx, y + r * scale + sy, c);
    x += 4 * scale;
  }
}

inline std::optional<Point2> find(const LandmarkMap& m, const std::string& name) {
  auto it = m.find(name);
  if (it == m.end()) return std::nullopt;
  return it->second;
}

}  // namespace overlay_detail

/// Draws landmarks and the Keros / Gera / TMS constructions on the slice and
/// writes an RGB PNG. Sides without a score are labelled with '-'.
inline void render_overlay(const SliceImage& slice, const LandmarkMap& landmarks_px,
                           const std::optional<SideScore>& left, const std::optional<SideScore>& right,
                           const std::filesystem::path& out_path) {
  using namespace overlay_detail;
  if (landmarks_px.empty()) throw Error(ErrorCode::MissingLandmark, "overlay needs a landmark set");
  Grid<Rgb8> img(slice.height(), slice.width());
  for (std::size_t i = 0; i < img.data().size(); ++i) {
    const auto v = static_cast<std::uint8_t>(std::lround(slice.pixels().data()[i] * 255.0));
    img.data()[i] = {v, v, v};
  }
  for (Side side : {Side::left, Side::right}) {
    using landmarks::side_name;
    const double dir = side == Side::left ? -1.0 : 1.0;
    const auto fe = find(landmarks_px, side_name("FE", side));
    const auto cp = find(landmarks_px, side_name("CP", side));
    const auto er = find(landmarks_px, side_name("ER", side));
    const auto of = find(landmarks_px, side_name("OF", side));
    if (fe && cp) {
      line(img, *fe, {fe->x, cp->y}, kYellow);            // Keros depth
      line(img, *cp, *fe, kGreen);                        // lamella ray
      line(img, *cp, *cp + Point2{dir * 20.0, 0.0}, kGreen);  // horizontal ray
    }
    if (of) {
      line(img, *of - Point2{30.0, 0.0}, *of + Point2{30.0, 0.0}, kCyan);  // TMS reference
      if (cp) line(img, {of->x, of->y}, {of->x, cp->y}, kCyan);
      if (er) line(img, {of->x + dir * 4.0, of->y}, {of->x + dir * 4.0, er->y}, kCyan);
    }
    const auto& score = side == Side::left ? left : right;
    std::string label = side == Side::left ? "L " : "R ";
    if (score) {
      label += std::string("K:") + to_string(score->classes.keros) + " G:" + to_string(score->classes.gera) +
               " T:" + to_string(score->classes.tms);
    } else {
      label += "-";
    }
    const long x = side == Side::left ? 4 : static_cast<long>(slice.width()) / 2 + 4;
    text(img, x, 4, label, kWhite);
  }
  for (const auto& [name, p] : landmarks_px) dot(img, p, kRed);
  write_png_rgb8(img, out_path);
}

inline void render_overlay(const SliceImage& slice, const SliceReport& report, const std::filesystem::path& out_path) {
  render_overlay(slice, report.landmarks, report.left, report.right, out_path);
}

}  // namespace skullbase

#endif  // SKULLBASE_OVERLAY_HPP
