#ifndef SKULLBASE_TYPES_HPP
#define SKULLBASE_TYPES_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace skullbase {

enum class ErrorCode {
  InvalidArgument,
  InvalidSigma,
  EmptyHeatmap,
  MissingLandmark,
  DegenerateLandmarks,
  SchemaViolation,
  NotLandscape,
  OutOfCrop,
  PatchTooLarge,
  InvalidSpec,
  MissingPrediction,
  FormatMismatch,
  CorruptFile,
  UnsupportedVersion,
  UnsupportedFormat,
  GeometryOverflow,
  LengthMismatch,
  IoError,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidSigma: return "InvalidSigma";
    case ErrorCode::EmptyHeatmap: return "EmptyHeatmap";
    case ErrorCode::MissingLandmark: return "MissingLandmark";
    case ErrorCode::DegenerateLandmarks: return "DegenerateLandmarks";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::NotLandscape: return "NotLandscape";
    case ErrorCode::OutOfCrop: return "OutOfCrop";
    case ErrorCode::PatchTooLarge: return "PatchTooLarge";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::MissingPrediction: return "MissingPrediction";
    case ErrorCode::FormatMismatch: return "FormatMismatch";
    case ErrorCode::CorruptFile: return "CorruptFile";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::GeometryOverflow: return "GeometryOverflow";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure in the library is raised as an Error carrying a code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Continuous pixel coordinate. Pixel centers sit at integer coordinates,
/// origin top-left, y grows downward.
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(Point2 a, double s) { return {a.x * s, a.y * s}; }
  friend Point2 operator/(Point2 a, double s) { return {a.x / s, a.y / s}; }
  friend bool operator==(Point2 a, Point2 b) { return a.x == b.x && a.y == b.y; }

  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Physical pixel size in mm (x = column, y = row).
struct Spacing {
  double x = 0.45;
  double y = 0.45;

  bool valid() const { return std::isfinite(x) && std::isfinite(y) && x > 0.0 && y > 0.0; }
};

/// Dense row-major 2D grid.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t height, std::size_t width, T fill = T{})
      : height_(height), width_(width), data_(height * width, fill) {}
  Grid(std::size_t height, std::size_t width, std::vector<T> data)
      : height_(height), width_(width), data_(std::move(data)) {
    if (data_.size() != height_ * width_) {
      throw Error(ErrorCode::InvalidArgument, "grid data size does not match dimensions");
    }
  }

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t row, std::size_t col) { return data_[row * width_ + col]; }
  const T& operator()(std::size_t row, std::size_t col) const { return data_[row * width_ + col]; }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.height_ == b.height_ && a.width_ == b.width_ && a.data_ == b.data_;
  }

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<T> data_;
};

}  // namespace skullbase

#endif  // SKULLBASE_TYPES_HPP
