#ifndef SKULLBASE_ANNOTATION_IO_HPP
#define SKULLBASE_ANNOTATION_IO_HPP

#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "skullbase/core.hpp"
#include "skullbase/image_io.hpp"

namespace skullbase {

using Json = nlohmann::json;

inline constexpr int kAnnotationSchemaVersion = 1;

/// Coordinates are written rounded to 6 decimal places.
inline double round6(double v) { return std::round(v * 1e6) / 1e6; }

inline Json point_to_json(Point2 p) { return Json::array({round6(p.x), round6(p.y)}); }

inline Json landmarks_to_json(const LandmarkMap& points) {
  Json out = Json::object();
  for (const auto& [name, p] : points) out[name] = point_to_json(p);
  return out;
}

namespace detail {

[[noreturn]] inline void corrupt(const std::string& what) { throw Error(ErrorCode::CorruptFile, what); }

inline double json_number(const Json& j, const char* what) {
  if (!j.is_number()) corrupt(std::string(what) + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) corrupt(std::string(what) + " must be finite");
  return v;
}

inline std::string json_string(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string()) corrupt(std::string("field '") + key + "' must be a string");
  return j.at(key).get<std::string>();
}

inline Json parse_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    corrupt(path.string() + ": " + e.what());
  }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

}  // namespace detail

inline Point2 point_from_json(const Json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2) detail::corrupt(what + " must be an [x, y] pair");
  return {detail::json_number(j[0], what.c_str()), detail::json_number(j[1], what.c_str())};
}

inline LandmarkMap landmarks_from_json(const Json& j) {
  if (!j.is_object()) detail::corrupt("landmarks must be an object");
  LandmarkMap out;
  for (const auto& [name, value] : j.items()) out[name] = point_from_json(value, "landmark " + name);
  return out;
}

/// Stable, indented JSON text with a trailing newline.
inline std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Annotation files
// ---------------------------------------------------------------------------

struct AnnotationFile {
  std::string sample_id;
  std::string patient_id;
  std::string image;  // relative to the annotation file
  Spacing spacing;
  LandmarkMap landmarks;

  /// Binds the landmarks to the default schema and the image bounds.
  AnnotationSet to_set(std::size_t height, std::size_t width) const {
    return AnnotationSet(default_schema(), landmarks, height, width);
  }
};

inline Json to_json(const AnnotationFile& a) {
  Json j = Json::object();
  j["schema_version"] = kAnnotationSchemaVersion;
  j["sample_id"] = a.sample_id;
  j["patient_id"] = a.patient_id;
  j["image"] = a.image;
  j["spacing"] = Json::array({a.spacing.x, a.spacing.y});
  j["landmarks"] = landmarks_to_json(a.landmarks);
  return j;
}

inline AnnotationFile annotation_from_json(const Json& j) {
  if (!j.is_object()) detail::corrupt("annotation must be a JSON object");
  if (!j.contains("schema_version") || !j.at("schema_version").is_number_integer()) {
    detail::corrupt("annotation lacks an integer schema_version");
  }
  const int version = j.at("schema_version").get<int>();
  if (version != kAnnotationSchemaVersion) {
    throw Error(ErrorCode::UnsupportedVersion, "annotation schema_version " + std::to_string(version));
  }
  AnnotationFile a;
  a.sample_id = detail::json_string(j, "sample_id");
  a.patient_id = detail::json_string(j, "patient_id");
  a.image = detail::json_string(j, "image");
  if (!j.contains("spacing") || !j.at("spacing").is_array() || j.at("spacing").size() != 2) {
    detail::corrupt("spacing must be [sx, sy]");
  }
  a.spacing = {detail::json_number(j.at("spacing")[0], "spacing"), detail::json_number(j.at("spacing")[1], "spacing")};
  if (!a.spacing.valid()) throw Error(ErrorCode::InvalidArgument, "spacing must be positive");
  if (!j.contains("landmarks")) detail::corrupt("annotation lacks landmarks");
  a.landmarks = landmarks_from_json(j.at("landmarks"));
  const auto& schema = default_schema();
  for (const auto& e : schema.entries()) {
    if (!a.landmarks.count(e.name)) throw Error(ErrorCode::MissingLandmark, "annotation lacks landmark " + e.name);
  }
  for (const auto& [name, p] : a.landmarks) {
    if (!schema.contains(name)) throw Error(ErrorCode::SchemaViolation, "unknown landmark " + name);
  }
  return a;
}

inline void write_annotation(const AnnotationFile& a, const std::filesystem::path& path) {
  detail::write_text_file(path, dump_json(to_json(a)));
}

inline AnnotationFile read_annotation(const std::filesystem::path& path) {
  return annotation_from_json(detail::parse_json_file(path));
}

// ---------------------------------------------------------------------------
// Manifests
// ---------------------------------------------------------------------------

struct ManifestEntry {
  std::string sample_id;
  std::string patient_id;
  std::string image;        // relative to the manifest
  std::string annotations;  // relative to the manifest
};

struct Manifest {
  std::filesystem::path root;  // directory holding manifest.json
  std::vector<ManifestEntry> entries;
};

inline Json to_json(const std::vector<ManifestEntry>& entries) {
  Json arr = Json::array();
  for (const auto& e : entries) {
    arr.push_back({{"sample_id", e.sample_id},
                   {"patient_id", e.patient_id},
                   {"image", e.image},
                   {"annotations", e.annotations}});
  }
  return arr;
}

inline void write_manifest(const std::vector<ManifestEntry>& entries, const std::filesystem::path& path) {
  detail::write_text_file(path, dump_json(to_json(entries)));
}

inline Manifest read_manifest(const std::filesystem::path& path) {
  const Json j = detail::parse_json_file(path);
  if (!j.is_array()) detail::corrupt("manifest must be a JSON array");
  Manifest m;
  m.root = path.parent_path();
  for (const auto& item : j) {
    if (!item.is_object()) detail::corrupt("manifest entries must be objects");
    m.entries.push_back({detail::json_string(item, "sample_id"), detail::json_string(item, "patient_id"),
                         detail::json_string(item, "image"), detail::json_string(item, "annotations")});
  }
  return m;
}

/// Image, annotation and the parsed annotation file of one manifest entry.
struct LoadedSample {
  std::string sample_id;
  SliceImage image;
  AnnotationSet annotations;
  AnnotationFile file;
};

inline LoadedSample load_annotated(const std::filesystem::path& annotation_path,
                                   const std::filesystem::path& image_override = {}) {
  AnnotationFile file = read_annotation(annotation_path);
  const auto image_path =
      image_override.empty() ? annotation_path.parent_path() / file.image : image_override;
  SliceImage img = load_image(image_path, file.spacing, file.patient_id, file.sample_id);
  AnnotationSet set = file.to_set(img.height(), img.width());
  std::string id = file.sample_id;
  return {std::move(id), std::move(img), std::move(set), std::move(file)};
}

inline LoadedSample load_sample(const Manifest& m, const ManifestEntry& e) {
  return load_annotated(m.root / e.annotations, m.root / e.image);
}

}  // namespace skullbase

#endif  // SKULLBASE_ANNOTATION_IO_HPP
