#ifndef SKULLBASE_FRAMES_HPP
#define SKULLBASE_FRAMES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <utility>

#include "skullbase/core.hpp"

namespace skullbase {

inline constexpr std::size_t kGlobalFrameSize = 256;
inline constexpr std::size_t kPatchSize = 96;
inline constexpr int kJitterMaxShift = 20;
inline constexpr double kMaxAugmentRotationDeg = 5.0;

/// Axis-aligned integer rectangle inside a source image.
struct CropRect {
  long x0 = 0;
  long y0 = 0;
  std::size_t height = 0;
  std::size_t width = 0;

  bool contains(Point2 p) const {
    return p.x >= static_cast<double>(x0) && p.y >= static_cast<double>(y0) &&
           p.x < static_cast<double>(x0) + static_cast<double>(width) &&
           p.y < static_cast<double>(y0) + static_cast<double>(height);
  }

  friend bool operator==(const CropRect&, const CropRect&) = default;
};

enum class FrameKind { global, patch };

inline const char* to_string(FrameKind k) { return k == FrameKind::global ? "global" : "patch"; }

/// Maps original-image coordinates into a frame: forward(p) = (p - origin) * scale.
/// The global frame is a square crop resized to `size`; a patch frame has scale 1.
struct FrameTransform {
  FrameKind kind = FrameKind::patch;
  CropRect rect;
  std::size_t size = 0;  // output frame side in pixels
  double scale = 1.0;

  Point2 forward(Point2 p) const {
    return {(p.x - static_cast<double>(rect.x0)) * scale, (p.y - static_cast<double>(rect.y0)) * scale};
  }
  Point2 inverse(Point2 p) const {
    return {p.x / scale + static_cast<double>(rect.x0), p.y / scale + static_cast<double>(rect.y0)};
  }
};

// ---------------------------------------------------------------------------
// Global frame
// ---------------------------------------------------------------------------

/// Square crop of side h, centered along the width.
inline CropRect square_crop_rect(std::size_t height, std::size_t width) {
  if (height > width) {
    throw Error(ErrorCode::NotLandscape, "square crop needs height <= width");
  }
  if (height == 0) throw Error(ErrorCode::InvalidArgument, "empty image");
  return {static_cast<long>((width - height) / 2), 0, height, height};
}

inline FrameTransform global_frame(const CropRect& rect, std::size_t out = kGlobalFrameSize) {
  if (rect.width != rect.height || rect.width == 0 || out == 0) {
    throw Error(ErrorCode::InvalidArgument, "global frame needs a non-empty square crop");
  }
  return {FrameKind::global, rect, out, static_cast<double>(out) / static_cast<double>(rect.width)};
}

inline Point2 to_global(Point2 p, const CropRect& rect, std::size_t out = kGlobalFrameSize) {
  if (!rect.contains(p)) {
    throw Error(ErrorCode::OutOfCrop, "point lies outside the square crop");
  }
  return global_frame(rect, out).forward(p);
}

/// Inverse of to_global; extrapolates for points outside the frame.
inline Point2 from_global(Point2 p, const CropRect& rect, std::size_t out = kGlobalFrameSize) {
  return global_frame(rect, out).inverse(p);
}

// ---------------------------------------------------------------------------
// Local patches
// ---------------------------------------------------------------------------

/// size x size rect around round(center), shifted to fit inside the image.
inline CropRect patch_rect(Point2 center, std::size_t size, std::size_t height, std::size_t width) {
  if (height < size || width < size) {
    throw Error(ErrorCode::PatchTooLarge, "image " + std::to_string(height) + "x" +
                                              std::to_string(width) + " is smaller than patch " +
                                              std::to_string(size));
  }
  if (!center.finite()) throw Error(ErrorCode::InvalidArgument, "patch center is not finite");
  const long half = static_cast<long>(size / 2);
  long x0 = std::lround(center.x) - half;
  long y0 = std::lround(center.y) - half;
  x0 = std::clamp(x0, 0L, static_cast<long>(width - size));
  y0 = std::clamp(y0, 0L, static_cast<long>(height - size));
  return {x0, y0, size, size};
}

inline FrameTransform patch_frame(const CropRect& rect) {
  return {FrameKind::patch, rect, rect.width, 1.0};
}

/// Integer offsets drawn uniformly from [-max_shift, max_shift] per axis.
template <typename Rng>
Point2 jitter_center(Point2 center, int max_shift, Rng& rng) {
  if (max_shift < 0) throw Error(ErrorCode::InvalidArgument, "max_shift must be >= 0");
  if (max_shift == 0) return center;
  std::uniform_int_distribution<int> shift(-max_shift, max_shift);
  const int dx = shift(rng);
  const int dy = shift(rng);
  return {center.x + dx, center.y + dy};
}

inline Point2 jitter_center(Point2 center, int max_shift, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return jitter_center(center, max_shift, rng);
}

// ---------------------------------------------------------------------------
// Resampling
// ---------------------------------------------------------------------------

enum class Border { zero, clamp };

/// Bilinear read at a continuous pixel position.
inline double sample_bilinear(const Grid<double>& g, double x, double y, Border border) {
  const long h = static_cast<long>(g.height());
  const long w = static_cast<long>(g.width());
  if (border == Border::clamp) {
    x = std::clamp(x, 0.0, static_cast<double>(w - 1));
    y = std::clamp(y, 0.0, static_cast<double>(h - 1));
  }
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const long xi = static_cast<long>(fx);
  const long yi = static_cast<long>(fy);
  const double ax = x - fx;
  const double ay = y - fy;
  auto at = [&](long r, long c) -> double {
    if (r < 0 || c < 0 || r >= h || c >= w) return 0.0;
    return g(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
  };
  return (1 - ay) * ((1 - ax) * at(yi, xi) + ax * at(yi, xi + 1)) +
         ay * ((1 - ax) * at(yi + 1, xi) + ax * at(yi + 1, xi + 1));
}

/// Renders the frame image seen by a predictor: for a patch this is a plain
/// copy, for the global frame a bilinear resize consistent with forward().
inline Grid<double> extract_frame(const Grid<double>& src, const FrameTransform& frame) {
  Grid<double> out(frame.size, frame.size);
  for (std::size_t v = 0; v < frame.size; ++v) {
    for (std::size_t u = 0; u < frame.size; ++u) {
      const Point2 s = frame.inverse({static_cast<double>(u), static_cast<double>(v)});
      if (frame.kind == FrameKind::patch) {
        out(v, u) = src(static_cast<std::size_t>(s.y), static_cast<std::size_t>(s.x));
      } else {
        // Keep reads inside the crop so neighbouring columns never leak in.
        const double cx = std::min(s.x, static_cast<double>(frame.rect.x0 + static_cast<long>(frame.rect.width) - 1));
        const double cy = std::min(s.y, static_cast<double>(frame.rect.y0 + static_cast<long>(frame.rect.height) - 1));
        out(v, u) = std::clamp(sample_bilinear(src, cx, cy, Border::clamp), 0.0, 1.0);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Augmentations
// ---------------------------------------------------------------------------

/// Mirrors pixels in x; every landmark moves to x' = (w-1) - x and takes its
/// mirror partner's name.
inline std::pair<SliceImage, AnnotationSet> hflip(const SliceImage& img, const AnnotationSet& ann) {
  const std::size_t w = img.width();
  Grid<double> px(img.height(), w);
  for (std::size_t r = 0; r < img.height(); ++r) {
    for (std::size_t c = 0; c < w; ++c) px(r, w - 1 - c) = img.pixels()(r, c);
  }
  LandmarkMap flipped;
  for (const auto& [name, p] : ann.points()) {
    flipped[ann.schema().mirror(name)] = {static_cast<double>(w - 1) - p.x, p.y};
  }
  return {SliceImage(std::move(px), img.spacing(), img.patient_id(), img.scan_id()),
          AnnotationSet(ann.schema(), std::move(flipped), ann.height(), ann.width())};
}

/// Rotation by theta degrees about the image center in the y-down frame:
/// a positive angle turns +x towards +y.
inline Point2 rotate_point(Point2 p, Point2 center, double theta_deg) {
  const double t = theta_deg * std::numbers::pi / 180.0;
  const double c = std::cos(t);
  const double s = std::sin(t);
  const Point2 d = p - center;
  return {center.x + c * d.x - s * d.y, center.y + s * d.x + c * d.y};
}

inline Point2 image_center(std::size_t height, std::size_t width) {
  return {(static_cast<double>(width) - 1.0) / 2.0, (static_cast<double>(height) - 1.0) / 2.0};
}

/// Bilinear rotation about the image center; reads outside the source are 0.
/// Throws SchemaViolation if a landmark rotates out of the image.
inline std::pair<SliceImage, AnnotationSet> rotate(const SliceImage& img, const AnnotationSet& ann,
                                                   double theta_deg) {
  const std::size_t h = img.height();
  const std::size_t w = img.width();
  const Point2 center = image_center(h, w);
  Grid<double> px(h, w);
  if (theta_deg == 0.0) {
    px = img.pixels();
  } else {
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t c = 0; c < w; ++c) {
        const Point2 src = rotate_point({static_cast<double>(c), static_cast<double>(r)}, center, -theta_deg);
        px(r, c) = std::clamp(sample_bilinear(img.pixels(), src.x, src.y, Border::zero), 0.0, 1.0);
      }
    }
  }
  LandmarkMap moved;
  for (const auto& [name, p] : ann.points()) {
    moved[name] = theta_deg == 0.0 ? p : rotate_point(p, center, theta_deg);
  }
  return {SliceImage(std::move(px), img.spacing(), img.patient_id(), img.scan_id()),
          AnnotationSet(ann.schema(), std::move(moved), h, w)};
}

/// Random horizontal flip (p = 0.5) followed by a rotation in [-5, 5] degrees.
template <typename Rng>
std::pair<SliceImage, AnnotationSet> augment(const SliceImage& img, const AnnotationSet& ann, Rng& rng) {
  std::bernoulli_distribution flip(0.5);
  std::uniform_real_distribution<double> angle(-kMaxAugmentRotationDeg, kMaxAugmentRotationDeg);
  const bool do_flip = flip(rng);
  const double theta = angle(rng);
  if (do_flip) {
    auto [fi, fa] = hflip(img, ann);
    return rotate(fi, fa, theta);
  }
  return rotate(img, ann, theta);
}

}  // namespace skullbase

#endif  // SKULLBASE_FRAMES_HPP
