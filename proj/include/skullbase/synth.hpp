#ifndef SKULLBASE_SYNTH_HPP
#define SKULLBASE_SYNTH_HPP

// Synthetic coronal skull-base phantoms. The Keros depth, Gera angle and both
// TMS distances of each side are the generator's free variables; landmarks
// are placed analytically from them, so scoring the ground truth recovers the
// sampled values exactly.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "skullbase/annotation_io.hpp"
#include "skullbase/core.hpp"
#include "skullbase/image_io.hpp"
#include "skullbase/measurements.hpp"

namespace skullbase {

using ClassProbabilities = std::array<double, 3>;

struct ClassMix {
  ClassProbabilities keros;
  ClassProbabilities gera;
  ClassProbabilities tms;

  /// Per-side class counts of the clinical cohort (1382 sides).
  static ClassMix clinical() {
    constexpr double n = 1382.0;
    return {{269 / n, 970 / n, 143 / n}, {43 / n, 1276 / n, 63 / n}, {1193 / n, 181 / n, 8 / n}};
  }

  static ClassMix uniform() {
    constexpr double t = 1.0 / 3.0;
    return {{t, t, t}, {t, t, t}, {t, t, t}};
  }

  void validate() const {
    for (const auto* p : {&keros, &gera, &tms}) {
      double sum = 0.0;
      for (double v : *p) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "class probabilities must be >= 0");
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorCode::InvalidArgument, "class probabilities must sum to 1");
    }
  }
};

// Sampling intervals per class. Open-ended classes are bounded so the
// anatomy stays inside the image.
inline constexpr double kKerosMinMm = 1.0;
inline constexpr double kKerosMaxMm = 12.0;
inline constexpr double kGeraMinDeg = 15.0;
inline constexpr double kTmsLowMinMm = 5.0;
inline constexpr double kTmsHighMaxMm = 16.0;
/// Cap on the horizontal extent of the lateral lamella; keeps FE inside the
/// 96 px patch around the Keros/Gera center.
inline constexpr double kMaxLamellaWidthPx = 20.0;
inline constexpr double kBorderMarginPx = 60.0;

struct SideAnatomy {
  RiskClasses classes;
  double keros_mm = 0.0;
  double gera_deg = 0.0;
  double tms1_mm = 0.0;
  double tms2_mm = 0.0;
  double cp_offset_px = 4.0;   // cribriform plate point, lateral of the midline
  double er_offset_px = 5.0;   // ethmoid roof point, lateral of FE
  double of_offset_px = 48.0;  // orbital floor point, lateral of the midline
};

struct AnatomyParams {
  SideAnatomy left;
  SideAnatomy right;
  double midline_x = 0.0;
  double base_y = 0.0;  // cribriform plate row
  double crista_height_px = 18.0;
  double septum_depth_px = 14.0;
  std::size_t height = 256;
  std::size_t width = 320;
  Spacing spacing;
  double noise = 0.03;
  std::uint64_t seed = 0;

  const SideAnatomy& side(Side s) const { return s == Side::left ? left : right; }
};

namespace detail {

template <typename Rng>
double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Uniform on (lo, hi]: mirror of the half-open [lo, hi) draw.
template <typename Rng>
double uniform_left_open(Rng& rng, double lo, double hi) {
  return hi - std::uniform_real_distribution<double>(0.0, hi - lo)(rng);
}

template <typename Rng>
ClassLabel draw_class(Rng& rng, const ClassProbabilities& p) {
  const double u = uniform(rng, 0.0, 1.0);
  if (u < p[0]) return ClassLabel::I;
  if (u < p[0] + p[1] || p[2] == 0.0) return ClassLabel::II;
  return ClassLabel::III;
}

inline double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

template <typename Rng>
SideAnatomy sample_side(Rng& rng, const ClassMix& mix, Spacing spacing) {
  SideAnatomy s;
  s.classes.keros = draw_class(rng, mix.keros);
  s.classes.gera = draw_class(rng, mix.gera);
  s.classes.tms = draw_class(rng, mix.tms);

  // A flat lamella (Gera III, < 45 deg) is wider than deep, so its depth must
  // fit the width cap.
  double keros_hi = kKerosMaxMm;
  if (s.classes.gera == ClassLabel::III) keros_hi = std::min(keros_hi, 0.999 * kMaxLamellaWidthPx * spacing.x);
  const double class_lo[] = {kKerosMinMm, 4.0, 8.0};
  if (keros_hi <= class_lo[index(s.classes.keros)]) {
    throw Error(ErrorCode::GeometryOverflow, "requested Keros/Gera classes cannot fit the lamella width cap");
  }
  switch (s.classes.keros) {
    case ClassLabel::I: s.keros_mm = uniform(rng, kKerosMinMm, std::min(4.0, keros_hi)); break;
    case ClassLabel::II: s.keros_mm = uniform(rng, 4.0, std::min(8.0, keros_hi)); break;
    case ClassLabel::III: s.keros_mm = uniform_left_open(rng, 8.0, keros_hi); break;
  }

  const double depth_px = s.keros_mm / spacing.y;
  const double min_angle = rad2deg(std::atan2(depth_px * spacing.y, kMaxLamellaWidthPx * spacing.x));
  switch (s.classes.gera) {
    case ClassLabel::I: s.gera_deg = uniform_left_open(rng, std::max(80.0, min_angle), 90.0); break;
    case ClassLabel::II: s.gera_deg = uniform(rng, std::max(45.0, min_angle), 80.0); break;
    case ClassLabel::III: s.gera_deg = uniform(rng, std::max(kGeraMinDeg, min_angle), 45.0); break;
  }

  auto low = [&] { return uniform(rng, kTmsLowMinMm, kTmsThresholdMm); };
  auto high = [&] { return uniform_left_open(rng, kTmsThresholdMm, kTmsHighMaxMm); };
  switch (s.classes.tms) {
    case ClassLabel::I:
      s.tms1_mm = high();
      s.tms2_mm = high();
      break;
    case ClassLabel::II:
      if (std::bernoulli_distribution(0.5)(rng)) {
        s.tms1_mm = low();
        s.tms2_mm = high();
      } else {
        s.tms1_mm = high();
        s.tms2_mm = low();
      }
      break;
    case ClassLabel::III:
      s.tms1_mm = low();
      s.tms2_mm = low();
      break;
  }
  s.cp_offset_px = uniform(rng, 3.0, 6.0);
  s.er_offset_px = uniform(rng, 2.0, 8.0);
  s.of_offset_px = uniform(rng, 40.0, 56.0);
  return s;
}

}  // namespace detail

/// Draws one phantom: classes from the mix, then each measurement uniformly
/// inside its class interval.
inline AnatomyParams sample_params(std::uint64_t seed, const ClassMix& mix = ClassMix::clinical(),
                                   Spacing spacing = {0.45, 0.45}) {
  mix.validate();
  if (!spacing.valid()) throw Error(ErrorCode::InvalidArgument, "spacing must be positive");
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x5eedu};
  std::mt19937_64 rng(seq);

  AnatomyParams p;
  p.seed = seed;
  p.spacing = spacing;
  p.left = detail::sample_side(rng, mix, spacing);
  p.right = detail::sample_side(rng, mix, spacing);
  p.height = static_cast<std::size_t>(std::uniform_int_distribution<int>(232, 288)(rng));
  p.width = p.height + static_cast<std::size_t>(std::uniform_int_distribution<int>(24, 96)(rng));
  p.midline_x = std::round(static_cast<double>(p.width) / 2.0) + detail::uniform(rng, -8.0, 8.0);
  p.base_y = static_cast<double>(p.height) * detail::uniform(rng, 0.40, 0.47);
  p.crista_height_px = detail::uniform(rng, 14.0, 22.0);
  p.septum_depth_px = detail::uniform(rng, 10.0, 18.0);
  p.noise = 0.03;
  return p;
}

/// Analytic landmark positions for a parameter set.
inline LandmarkMap phantom_landmarks(const AnatomyParams& p) {
  using landmarks::side_name;
  LandmarkMap out;
  for (Side side : {Side::left, Side::right}) {
    const SideAnatomy& s = p.side(side);
    // Image left is patient right in radiological display; here "left" simply
    // means smaller x.
    const double dir = side == Side::left ? -1.0 : 1.0;
    const Point2 cp{p.midline_x + dir * s.cp_offset_px, p.base_y};
    const double dy = s.keros_mm / p.spacing.y;
    const double dx = s.gera_deg >= 90.0 ? 0.0
                                         : (dy * p.spacing.y) / std::tan(detail::deg2rad(s.gera_deg)) / p.spacing.x;
    const Point2 fe{cp.x + dir * dx, cp.y - dy};
    const Point2 of{p.midline_x + dir * s.of_offset_px, p.base_y + s.tms1_mm / p.spacing.y};
    const Point2 er{fe.x + dir * s.er_offset_px, of.y - s.tms2_mm / p.spacing.y};
    out[side_name("CP", side)] = cp;
    out[side_name("FE", side)] = fe;
    out[side_name("OF", side)] = of;
    out[side_name("ER", side)] = er;
  }
  out[std::string(landmarks::CG)] = {p.midline_x, p.base_y - p.crista_height_px};
  out[std::string(landmarks::SEPT)] = {p.midline_x, p.base_y + p.septum_depth_px};
  return out;
}

namespace detail {

struct Segment {
  Point2 a;
  Point2 b;
};

inline double segment_distance(Point2 p, const Segment& s) {
  const Point2 ab = s.b - s.a;
  const double len2 = ab.x * ab.x + ab.y * ab.y;
  double t = len2 > 0.0 ? ((p.x - s.a.x) * ab.x + (p.y - s.a.y) * ab.y) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return distance(p, s.a + ab * t);
}

/// Bright bone curves as a max-composite of Gaussian line profiles.
inline void draw_segment(Grid<double>& img, const Segment& s, double intensity, double width) {
  const double reach = 4.0 * width;
  const long h = static_cast<long>(img.height());
  const long w = static_cast<long>(img.width());
  const long x0 = std::max(0L, static_cast<long>(std::floor(std::min(s.a.x, s.b.x) - reach)));
  const long x1 = std::min(w - 1, static_cast<long>(std::ceil(std::max(s.a.x, s.b.x) + reach)));
  const long y0 = std::max(0L, static_cast<long>(std::floor(std::min(s.a.y, s.b.y) - reach)));
  const long y1 = std::min(h - 1, static_cast<long>(std::ceil(std::max(s.a.y, s.b.y) + reach)));
  for (long y = y0; y <= y1; ++y) {
    for (long x = x0; x <= x1; ++x) {
      const double d = segment_distance({static_cast<double>(x), static_cast<double>(y)}, s);
      const double v = intensity * std::exp(-d * d / (2.0 * width * width));
      double& px = img(static_cast<std::size_t>(y), static_cast<std::size_t>(x));
      px = std::max(px, v);
    }
  }
}

}  // namespace detail

/// Raises GeometryOverflow when a landmark is closer than 60 px to a border.
inline void check_margins(const LandmarkMap& points, std::size_t height, std::size_t width) {
  for (const auto& [name, q] : points) {
    if (q.x < kBorderMarginPx || q.y < kBorderMarginPx || q.x > static_cast<double>(width) - 1.0 - kBorderMarginPx ||
        q.y > static_cast<double>(height) - 1.0 - kBorderMarginPx) {
      throw Error(ErrorCode::GeometryOverflow, "landmark " + name + " falls inside the 60 px border margin");
    }
  }
}

inline std::pair<SliceImage, AnnotationSet> render_phantom(const AnatomyParams& p, std::string patient_id = {},
                                                           std::string scan_id = {}) {
  if (p.height > p.width) throw Error(ErrorCode::NotLandscape, "phantom must be at least as wide as tall");
  const LandmarkMap pts = phantom_landmarks(p);
  check_margins(pts, p.height, p.width);

  using namespace landmarks;
  using detail::Segment;
  std::vector<Segment> bone;
  const Point2 mid_base{p.midline_x, p.base_y};
  const Point2 sept = pts.at(std::string(SEPT));
  bone.push_back({pts.at(std::string(CP_left)), pts.at(std::string(CP_right))});
  bone.push_back({mid_base, pts.at(std::string(CG))});
  bone.push_back({mid_base, sept});
  bone.push_back({sept, sept + Point2{0.0, 30.0}});
  for (Side side : {Side::left, Side::right}) {
    const double dir = side == Side::left ? -1.0 : 1.0;
    const Point2 cp = pts.at(side_name("CP", side));
    const Point2 fe = pts.at(side_name("FE", side));
    const Point2 er = pts.at(side_name("ER", side));
    const Point2 of = pts.at(side_name("OF", side));
    bone.push_back({cp, fe});                                   // lateral lamella
    bone.push_back({fe, er});                                   // fovea / ethmoid roof
    bone.push_back({er, er + Point2{dir * 22.0, 6.0}});         // roof towards the orbit
    bone.push_back({of - Point2{dir * 16.0, -3.0}, of});        // orbital floor, medial half
    bone.push_back({of, of + Point2{dir * 18.0, -4.0}});        // orbital floor, lateral half
    bone.push_back({of - Point2{dir * 16.0, -3.0}, er + Point2{dir * 6.0, 10.0}});  // medial orbital wall
  }

  Grid<double> img(p.height, p.width, 0.08);
  for (const auto& s : bone) detail::draw_segment(img, s, 0.85, 1.1);
  std::mt19937_64 rng(p.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> noise(0.0, p.noise);
  for (double& v : img.data()) v = std::clamp(v + (p.noise > 0.0 ? noise(rng) : 0.0), 0.0, 1.0);

  SliceImage slice(std::move(img), p.spacing, std::move(patient_id), std::move(scan_id));
  AnnotationSet ann(default_schema(), pts, p.height, p.width);
  return {std::move(slice), std::move(ann)};
}

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

/// Probability that a new sample is a second slice of the previous patient.
inline constexpr double kSecondSliceRate = 51.0 / 691.0;

inline std::string format_id(char prefix, std::size_t n) {
  std::ostringstream os;
  os << prefix << std::setw(5) << std::setfill('0') << n;
  return os.str();
}

/// Per-sample seed derived from (master seed, index).
inline std::uint64_t sample_seed(std::uint64_t master, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

/// Patient id for each of n samples; some patients own two consecutive slices.
inline std::vector<std::string> assign_patients(std::size_t n, std::uint64_t seed, bool allow_duplicates = true) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x9a71u};
  std::mt19937_64 rng(seq);
  std::bernoulli_distribution second(kSecondSliceRate);
  std::vector<std::string> ids;
  ids.reserve(n);
  std::size_t patients = 0;
  bool prev_single = false;
  for (std::size_t i = 0; i < n; ++i) {
    const bool dup = second(rng);
    if (allow_duplicates && prev_single && dup) {
      ids.push_back(ids.back());
      prev_single = false;
    } else {
      ids.push_back(format_id('P', ++patients));
      prev_single = true;
    }
  }
  return ids;
}

struct SyntheticSample {
  std::string sample_id;
  std::string patient_id;
  AnatomyParams params;
  SliceImage image;
  AnnotationSet annotations;
};

inline SyntheticSample make_sample(std::size_t index, std::uint64_t master_seed, const std::string& patient_id,
                                   const ClassMix& mix = ClassMix::clinical(), Spacing spacing = {0.45, 0.45}) {
  const std::string sample_id = format_id('S', index + 1);
  AnatomyParams params = sample_params(sample_seed(master_seed, index), mix, spacing);
  auto [img, ann] = render_phantom(params, patient_id, sample_id);
  return {sample_id, patient_id, std::move(params), std::move(img), std::move(ann)};
}

/// In-memory dataset, deterministic per (n, seed, mix).
inline std::vector<SyntheticSample> make_dataset(std::size_t n, std::uint64_t seed,
                                                 const ClassMix& mix = ClassMix::clinical(),
                                                 Spacing spacing = {0.45, 0.45}) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "dataset needs at least one sample");
  const auto patients = assign_patients(n, seed);
  std::vector<SyntheticSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(make_sample(i, seed, patients[i], mix, spacing));
  return out;
}

/// Writes images/<id>.png, annotations/<id>.json and manifest.json under out_dir.
inline std::vector<ManifestEntry> generate_dataset(std::size_t n, std::uint64_t seed, const ClassMix& mix,
                                                   const std::filesystem::path& out_dir,
                                                   Spacing spacing = {0.45, 0.45}) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "dataset needs at least one sample");
  mix.validate();
  std::filesystem::create_directories(out_dir / "images");
  std::filesystem::create_directories(out_dir / "annotations");
  const auto patients = assign_patients(n, seed);
  std::vector<ManifestEntry> manifest;
  manifest.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const SyntheticSample s = make_sample(i, seed, patients[i], mix, spacing);
    const std::string image_rel = "images/" + s.sample_id + ".png";
    const std::string ann_rel = "annotations/" + s.sample_id + ".json";
    write_png_gray16(s.image.pixels(), out_dir / image_rel);
    AnnotationFile file{s.sample_id, s.patient_id, "../" + image_rel, s.image.spacing(), s.annotations.points()};
    write_annotation(file, out_dir / ann_rel);
    manifest.push_back({s.sample_id, s.patient_id, image_rel, ann_rel});
  }
  write_manifest(manifest, out_dir / "manifest.json");
  return manifest;
}

}  // namespace skullbase

#endif  // SKULLBASE_SYNTH_HPP
