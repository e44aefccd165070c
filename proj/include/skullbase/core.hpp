#ifndef SKULLBASE_CORE_HPP
#define SKULLBASE_CORE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "skullbase/types.hpp"

namespace skullbase {

// ---------------------------------------------------------------------------
// Images
// ---------------------------------------------------------------------------

/// Single-channel coronal slice with intensities in [0,1].
/// Construction enforces h <= w, positive spacing and the intensity range.
class SliceImage {
 public:
  SliceImage() = default;

  SliceImage(Grid<double> pixels, Spacing spacing, std::string patient_id = {},
             std::string scan_id = {})
      : pixels_(std::move(pixels)),
        spacing_(spacing),
        patient_id_(std::move(patient_id)),
        scan_id_(std::move(scan_id)) {
    if (pixels_.height() < 1 || pixels_.width() < 1) {
      throw Error(ErrorCode::InvalidArgument, "image must have at least one pixel");
    }
    if (pixels_.height() > pixels_.width()) {
      throw Error(ErrorCode::NotLandscape, "image height " + std::to_string(pixels_.height()) +
                                               " exceeds width " +
                                               std::to_string(pixels_.width()));
    }
    if (!spacing_.valid()) {
      throw Error(ErrorCode::InvalidArgument, "pixel spacing must be positive");
    }
    for (double v : pixels_.data()) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "intensity outside [0,1]");
      }
    }
  }

  std::size_t height() const { return pixels_.height(); }
  std::size_t width() const { return pixels_.width(); }
  const Grid<double>& pixels() const { return pixels_; }
  Spacing spacing() const { return spacing_; }
  const std::string& patient_id() const { return patient_id_; }
  const std::string& scan_id() const { return scan_id_; }

 private:
  Grid<double> pixels_;
  Spacing spacing_;
  std::string patient_id_;
  std::string scan_id_;
};

// ---------------------------------------------------------------------------
// Landmark schema
// ---------------------------------------------------------------------------

enum class Side { left, right, midline };

inline const char* to_string(Side side) {
  switch (side) {
    case Side::left: return "left";
    case Side::right: return "right";
    case Side::midline: return "midline";
  }
  return "?";
}

namespace landmarks {
inline constexpr std::string_view FE_left = "FE_left";
inline constexpr std::string_view CP_left = "CP_left";
inline constexpr std::string_view ER_left = "ER_left";
inline constexpr std::string_view OF_left = "OF_left";
inline constexpr std::string_view FE_right = "FE_right";
inline constexpr std::string_view CP_right = "CP_right";
inline constexpr std::string_view ER_right = "ER_right";
inline constexpr std::string_view OF_right = "OF_right";
inline constexpr std::string_view CG = "CG";
inline constexpr std::string_view SEPT = "SEPT";

/// Name of a per-side landmark, e.g. side_name("FE", Side::left) == "FE_left".
inline std::string side_name(std::string_view stem, Side side) {
  return std::string(stem) + "_" + to_string(side);
}
}  // namespace landmarks

/// Ordered, registry-driven list of landmark names with side tags and a
/// left/right mirror pairing.
class LandmarkSchema {
 public:
  struct Entry {
    std::string name;
    Side side = Side::midline;
    std::string mirror;
  };

  static constexpr std::size_t kLandmarkCount = 10;

  explicit LandmarkSchema(std::vector<Entry> entries) : entries_(std::move(entries)) {
    if (entries_.size() != kLandmarkCount) {
      throw Error(ErrorCode::SchemaViolation,
                  "schema must have exactly 10 landmarks, got " + std::to_string(entries_.size()));
    }
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (!index_.emplace(entries_[i].name, i).second) {
        throw Error(ErrorCode::SchemaViolation, "duplicate landmark name " + entries_[i].name);
      }
    }
    for (const auto& e : entries_) {
      auto it = index_.find(e.mirror);
      if (it == index_.end()) {
        throw Error(ErrorCode::SchemaViolation, "mirror of " + e.name + " is not in the schema");
      }
      const Entry& m = entries_[it->second];
      if (m.mirror != e.name) {
        throw Error(ErrorCode::SchemaViolation, "mirror pairing is not an involution at " + e.name);
      }
      if (e.side == Side::midline && e.mirror != e.name) {
        throw Error(ErrorCode::SchemaViolation, "midline landmark " + e.name + " must mirror to itself");
      }
      if (e.side != Side::midline && (m.side == e.side || m.side == Side::midline)) {
        throw Error(ErrorCode::SchemaViolation, "lateral landmark " + e.name + " must mirror across sides");
      }
    }
  }

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.name);
    return out;
  }

  bool contains(std::string_view name) const { return index_.find(std::string(name)) != index_.end(); }

  const Entry& entry(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) {
      throw Error(ErrorCode::MissingLandmark, "landmark " + std::string(name) + " not in schema");
    }
    return entries_[it->second];
  }

  const std::string& mirror(std::string_view name) const { return entry(name).mirror; }
  Side side(std::string_view name) const { return entry(name).side; }

  friend bool operator==(const LandmarkSchema& a, const LandmarkSchema& b) {
    if (a.entries_.size() != b.entries_.size()) return false;
    for (std::size_t i = 0; i < a.entries_.size(); ++i) {
      const auto& x = a.entries_[i];
      const auto& y = b.entries_[i];
      if (x.name != y.name || x.side != y.side || x.mirror != y.mirror) return false;
    }
    return true;
  }

 private:
  std::vector<Entry> entries_;
  std::map<std::string, std::size_t> index_;
};

/// Canonical schema: FE/CP/ER/OF on each side plus the midline CG and SEPT.
inline const LandmarkSchema& default_schema() {
  static const LandmarkSchema schema = [] {
    using namespace landmarks;
    std::vector<LandmarkSchema::Entry> entries;
    for (std::string_view stem : {"FE", "CP", "ER", "OF"}) {
      entries.push_back({side_name(stem, Side::left), Side::left, side_name(stem, Side::right)});
      entries.push_back({side_name(stem, Side::right), Side::right, side_name(stem, Side::left)});
    }
    entries.push_back({std::string(CG), Side::midline, std::string(CG)});
    entries.push_back({std::string(SEPT), Side::midline, std::string(SEPT)});
    return LandmarkSchema(std::move(entries));
  }();
  return schema;
}

// ---------------------------------------------------------------------------
// Annotations
// ---------------------------------------------------------------------------

/// Named points; used for predictions that may cover only part of a schema.
using LandmarkMap = std::map<std::string, Point2>;

inline Point2 require_landmark(const LandmarkMap& points, std::string_view name) {
  auto it = points.find(std::string(name));
  if (it == points.end()) {
    throw Error(ErrorCode::MissingLandmark, "missing landmark " + std::string(name));
  }
  return it->second;
}

/// Complete, in-bounds annotation of one slice under a schema.
class AnnotationSet {
 public:
  AnnotationSet(LandmarkSchema schema, LandmarkMap points, std::size_t height, std::size_t width)
      : schema_(std::move(schema)), points_(std::move(points)), height_(height), width_(width) {
    for (const auto& e : schema_.entries()) {
      if (points_.find(e.name) == points_.end()) {
        throw Error(ErrorCode::MissingLandmark, "annotation lacks landmark " + e.name);
      }
    }
    for (const auto& [name, p] : points_) {
      if (!schema_.contains(name)) {
        throw Error(ErrorCode::SchemaViolation, "landmark " + name + " is not part of the schema");
      }
      if (!p.finite()) {
        throw Error(ErrorCode::InvalidArgument, "landmark " + name + " is not finite");
      }
      if (p.x < 0.0 || p.y < 0.0 || p.x >= static_cast<double>(width_) ||
          p.y >= static_cast<double>(height_)) {
        throw Error(ErrorCode::SchemaViolation, "landmark " + name + " lies outside the image");
      }
    }
  }

  AnnotationSet(LandmarkMap points, std::size_t height, std::size_t width)
      : AnnotationSet(default_schema(), std::move(points), height, width) {}

  const LandmarkSchema& schema() const { return schema_; }
  const LandmarkMap& points() const { return points_; }
  Point2 at(std::string_view name) const { return require_landmark(points_, name); }
  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }

  friend bool operator==(const AnnotationSet& a, const AnnotationSet& b) {
    return a.points_ == b.points_ && a.height_ == b.height_ && a.width_ == b.width_ &&
           a.schema_ == b.schema_;
  }

 private:
  LandmarkSchema schema_;
  LandmarkMap points_;
  std::size_t height_;
  std::size_t width_;
};

// ---------------------------------------------------------------------------
// Measurements and classes
// ---------------------------------------------------------------------------

enum class ClassLabel { I = 0, II = 1, III = 2 };

inline const char* to_string(ClassLabel c) {
  switch (c) {
    case ClassLabel::I: return "I";
    case ClassLabel::II: return "II";
    case ClassLabel::III: return "III";
  }
  return "?";
}

inline ClassLabel class_from_string(std::string_view s) {
  if (s == "I") return ClassLabel::I;
  if (s == "II") return ClassLabel::II;
  if (s == "III") return ClassLabel::III;
  throw Error(ErrorCode::FormatMismatch, "unknown class label " + std::string(s));
}

inline constexpr std::size_t index(ClassLabel c) { return static_cast<std::size_t>(c); }

inline constexpr std::array<ClassLabel, 3> kAllClasses = {ClassLabel::I, ClassLabel::II,
                                                          ClassLabel::III};

struct SideMeasurements {
  double keros_depth_mm = 0.0;
  double gera_angle_deg = 0.0;
  double tms1_mm = 0.0;  // orbital floor to cribriform plate
  double tms2_mm = 0.0;  // orbital floor to ethmoid roof
};

struct RiskClasses {
  ClassLabel keros = ClassLabel::I;
  ClassLabel gera = ClassLabel::I;
  ClassLabel tms = ClassLabel::I;

  friend bool operator==(const RiskClasses&, const RiskClasses&) = default;
};

struct SideScore {
  SideMeasurements measurements;
  RiskClasses classes;
};

}  // namespace skullbase

#endif  // SKULLBASE_CORE_HPP
