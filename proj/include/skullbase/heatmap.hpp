#ifndef SKULLBASE_HEATMAP_HPP
#define SKULLBASE_HEATMAP_HPP

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "skullbase/core.hpp"

namespace skullbase {

using Heatmap = Grid<double>;

/// Ordered channels, one heatmap per landmark name.
struct HeatmapStack {
  std::vector<std::string> names;
  std::vector<Heatmap> channels;

  std::size_t size() const { return channels.size(); }
  bool empty() const { return channels.empty(); }
};

/// Renders the anisotropic Gaussian
///   H(x,y) = exp(-((x-x0)^2 / (2 sx^2) + (y-y0)^2 / (2 sy^2)))
/// on the pixel grid. The peak is not mass-normalized.
inline Heatmap encode(Point2 point, std::size_t height, std::size_t width, double sigma_x,
                      double sigma_y) {
  if (!(sigma_x > 0.0) || !(sigma_y > 0.0) || !std::isfinite(sigma_x) || !std::isfinite(sigma_y)) {
    throw Error(ErrorCode::InvalidSigma, "sigma must be positive");
  }
  if (height < 1 || width < 1) {
    throw Error(ErrorCode::InvalidArgument, "heatmap must have at least one pixel");
  }
  if (!point.finite()) {
    throw Error(ErrorCode::InvalidArgument, "target point is not finite");
  }
  // Separable: the exponent is a sum, so H is an outer product of two 1D profiles.
  std::vector<double> gx(width), gy(height);
  const double ax = 1.0 / (2.0 * sigma_x * sigma_x);
  const double ay = 1.0 / (2.0 * sigma_y * sigma_y);
  for (std::size_t c = 0; c < width; ++c) {
    const double d = static_cast<double>(c) - point.x;
    gx[c] = d * d * ax;
  }
  for (std::size_t r = 0; r < height; ++r) {
    const double d = static_cast<double>(r) - point.y;
    gy[r] = d * d * ay;
  }
  Heatmap hm(height, width);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      hm(r, c) = std::exp(-(gx[c] + gy[r]));
    }
  }
  return hm;
}

inline Heatmap encode(Point2 point, std::size_t height, std::size_t width, double sigma) {
  return encode(point, height, width, sigma, sigma);
}

inline constexpr int kDecodeWindow = 13;

/// Center of mass of max(value, 0) inside a window x window box centered on
/// the global argmax. Ties go to the first cell in row-major order; the box is
/// clipped at the image border.
inline Point2 decode(const Heatmap& hm, int window = kDecodeWindow) {
  if (window < 1 || window % 2 == 0) {
    throw Error(ErrorCode::InvalidArgument, "decode window must be odd and >= 1");
  }
  if (hm.empty()) {
    throw Error(ErrorCode::EmptyHeatmap, "heatmap has no pixels");
  }
  const std::size_t h = hm.height();
  const std::size_t w = hm.width();
  std::size_t best = 0;
  const auto& data = hm.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i])) {
      throw Error(ErrorCode::InvalidArgument, "heatmap contains non-finite values");
    }
    if (data[i] > data[best]) best = i;
  }
  const long row = static_cast<long>(best / w);
  const long col = static_cast<long>(best % w);
  const long half = window / 2;
  const long r0 = std::max(0L, row - half);
  const long r1 = std::min(static_cast<long>(h) - 1, row + half);
  const long c0 = std::max(0L, col - half);
  const long c1 = std::min(static_cast<long>(w) - 1, col + half);

  double mass = 0.0, sx = 0.0, sy = 0.0;
  for (long r = r0; r <= r1; ++r) {
    for (long c = c0; c <= c1; ++c) {
      const double v = std::max(hm(static_cast<std::size_t>(r), static_cast<std::size_t>(c)), 0.0);
      mass += v;
      sx += v * static_cast<double>(c);
      sy += v * static_cast<double>(r);
    }
  }
  if (!(mass > 0.0)) {
    throw Error(ErrorCode::EmptyHeatmap, "no positive mass around the maximum");
  }
  return {sx / mass, sy / mass};
}

/// One channel per requested name, in the requested order.
inline HeatmapStack encode_stack(const LandmarkMap& points, std::span<const std::string> names,
                                 std::size_t height, std::size_t width, double sigma) {
  HeatmapStack stack;
  stack.names.assign(names.begin(), names.end());
  stack.channels.reserve(names.size());
  for (const auto& name : names) {
    stack.channels.push_back(encode(require_landmark(points, name), height, width, sigma));
  }
  return stack;
}

inline HeatmapStack encode_stack(const AnnotationSet& ann, std::span<const std::string> names,
                                 std::size_t height, std::size_t width, double sigma) {
  return encode_stack(ann.points(), names, height, width, sigma);
}

inline Heatmap hflip(const Heatmap& hm) {
  Heatmap out(hm.height(), hm.width());
  const std::size_t w = hm.width();
  for (std::size_t r = 0; r < hm.height(); ++r) {
    for (std::size_t c = 0; c < w; ++c) out(r, w - 1 - c) = hm(r, c);
  }
  return out;
}

}  // namespace skullbase

#endif  // SKULLBASE_HEATMAP_HPP
