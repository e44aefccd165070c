#ifndef SKULLBASE_MEASUREMENTS_HPP
#define SKULLBASE_MEASUREMENTS_HPP

#include <cmath>
#include <numbers>
#include <utility>

#include "skullbase/core.hpp"

namespace skullbase {

namespace detail {
inline void require_spacing(double s, const char* axis) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw Error(ErrorCode::InvalidArgument, std::string("spacing_") + axis + " must be positive");
  }
}
}  // namespace detail

/// Olfactory fossa depth: vertical distance fovea ethmoidalis to cribriform plate.
inline double keros_depth(Point2 fe, Point2 cp, double spacing_y) {
  detail::require_spacing(spacing_y, "y");
  return std::abs(fe.y - cp.y) * spacing_y;
}

/// Angle of the lateral lamella (CP -> FE) against the image horizontal through
/// CP, in degrees within [0, 90].
inline double gera_angle(Point2 fe, Point2 cp, double spacing_x, double spacing_y) {
  detail::require_spacing(spacing_x, "x");
  detail::require_spacing(spacing_y, "y");
  if (fe == cp) {
    throw Error(ErrorCode::DegenerateLandmarks, "FE and CP coincide; lamella angle undefined");
  }
  const double dx = std::abs(fe.x - cp.x) * spacing_x;
  const double dy = std::abs(fe.y - cp.y) * spacing_y;
  if (dx == 0.0) return 90.0;
  return std::atan2(dy, dx) * 180.0 / std::numbers::pi;
}

/// Vertical offsets from the horizontal through the orbital floor to the
/// cribriform plate (first) and to the ethmoid roof (second).
inline std::pair<double, double> tms_distances(Point2 of, Point2 cp, Point2 er, double spacing_y) {
  detail::require_spacing(spacing_y, "y");
  return {std::abs(of.y - cp.y) * spacing_y, std::abs(of.y - er.y) * spacing_y};
}

// Boundary values belong to the middle class (4 and 8 mm; 45 and 80 deg).
// For TMS a distance of exactly 10 mm is not low.

inline ClassLabel classify_keros(double depth_mm) {
  if (depth_mm < 4.0) return ClassLabel::I;
  if (depth_mm <= 8.0) return ClassLabel::II;
  return ClassLabel::III;
}

inline ClassLabel classify_gera(double angle_deg) {
  if (angle_deg > 80.0) return ClassLabel::I;
  if (angle_deg >= 45.0) return ClassLabel::II;
  return ClassLabel::III;
}

inline constexpr double kTmsThresholdMm = 10.0;

inline ClassLabel classify_tms(double d1_mm, double d2_mm) {
  const int low = (d1_mm < kTmsThresholdMm ? 1 : 0) + (d2_mm < kTmsThresholdMm ? 1 : 0);
  return static_cast<ClassLabel>(low);
}

inline RiskClasses classify(const SideMeasurements& m) {
  return {classify_keros(m.keros_depth_mm), classify_gera(m.gera_angle_deg),
          classify_tms(m.tms1_mm, m.tms2_mm)};
}

/// Measures and classifies one side from its FE/CP/ER/OF landmarks.
inline SideScore score_side(const LandmarkMap& points, Side side, Spacing spacing) {
  if (side == Side::midline) {
    throw Error(ErrorCode::InvalidArgument, "scoring needs a lateral side");
  }
  using landmarks::side_name;
  const Point2 fe = require_landmark(points, side_name("FE", side));
  const Point2 cp = require_landmark(points, side_name("CP", side));
  const Point2 er = require_landmark(points, side_name("ER", side));
  const Point2 of = require_landmark(points, side_name("OF", side));

  SideScore out;
  out.measurements.keros_depth_mm = keros_depth(fe, cp, spacing.y);
  out.measurements.gera_angle_deg = gera_angle(fe, cp, spacing.x, spacing.y);
  std::tie(out.measurements.tms1_mm, out.measurements.tms2_mm) = tms_distances(of, cp, er, spacing.y);
  out.classes = classify(out.measurements);
  return out;
}

inline SideScore score_side(const AnnotationSet& ann, Side side, Spacing spacing) {
  return score_side(ann.points(), side, spacing);
}

}  // namespace skullbase

#endif  // SKULLBASE_MEASUREMENTS_HPP
