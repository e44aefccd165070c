#ifndef SKULLBASE_PIPELINE_HPP
#define SKULLBASE_PIPELINE_HPP

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skullbase/frames.hpp"
#include "skullbase/heatmap.hpp"
#include "skullbase/measurements.hpp"
#include "skullbase/predictor.hpp"

namespace skullbase {

enum class Mode { direct, g2l, groundtruth };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::direct: return "direct";
    case Mode::g2l: return "g2l";
    case Mode::groundtruth: return "groundtruth";
  }
  return "?";
}

inline Mode mode_from_string(std::string_view s) {
  if (s == "direct") return Mode::direct;
  if (s == "g2l") return Mode::g2l;
  if (s == "groundtruth") return Mode::groundtruth;
  throw Error(ErrorCode::InvalidArgument, "unknown mode " + std::string(s));
}

/// One predictor call: where the frame sits in the original image and what
/// was decoded from it (frame coordinates).
struct FrameRecord {
  Stage stage = Stage::global;
  FrameTransform frame;
  LandmarkMap decoded;
  std::vector<std::string> failed;  // channels whose decode found no mass
};

enum class ReportStatus { ok, partial, unscorable };

inline const char* to_string(ReportStatus s) {
  switch (s) {
    case ReportStatus::ok: return "ok";
    case ReportStatus::partial: return "partial";
    case ReportStatus::unscorable: return "unscorable";
  }
  return "?";
}

struct SliceReport {
  std::string sample_id;
  Mode mode = Mode::groundtruth;
  std::string predictor;
  Spacing spacing;
  LandmarkMap landmarks;  // original-image pixels
  std::vector<FrameRecord> frames;
  std::optional<SideScore> left;
  std::optional<SideScore> right;

  ReportStatus status() const {
    const int n = (left ? 1 : 0) + (right ? 1 : 0);
    return n == 2 ? ReportStatus::ok : n == 1 ? ReportStatus::partial : ReportStatus::unscorable;
  }

  const std::optional<SideScore>& side(Side s) const { return s == Side::left ? left : right; }
};

struct StageBindings {
  std::shared_ptr<const Predictor> global;
  std::shared_ptr<const Predictor> direct;
  std::shared_ptr<const Predictor> local_kg;
  std::shared_ptr<const Predictor> local_of;

  static StageBindings all(std::shared_ptr<const Predictor> p) { return {p, p, p, p}; }
};

struct PipelineConfig {
  Mode mode = Mode::g2l;
  std::size_t global_size = kGlobalFrameSize;
  std::size_t patch_size = kPatchSize;
  int decode_window = kDecodeWindow;
  double global_sigma = kGlobalSigma;
  double local_sigma = kLocalSigma;

  void validate(const StageBindings& b) const {
    if (global_size == 0 || patch_size == 0) throw Error(ErrorCode::InvalidArgument, "frame sizes must be positive");
    if (decode_window < 1 || decode_window % 2 == 0) throw Error(ErrorCode::InvalidArgument, "decode window must be odd");
    if (!(global_sigma > 0.0) || !(local_sigma > 0.0)) throw Error(ErrorCode::InvalidSigma, "sigmas must be positive");
    if (mode == Mode::direct && !b.direct) throw Error(ErrorCode::InvalidSpec, "direct mode needs a direct predictor");
    if (mode == Mode::g2l && (!b.global || !b.local_kg || !b.local_of)) {
      throw Error(ErrorCode::InvalidSpec, "g2l mode needs global, local_kg and local_of predictors");
    }
  }

  StageSpec spec(Stage stage) const {
    StageSpec s = stage_spec(stage);
    const bool global_frame = stage == Stage::global || stage == Stage::direct;
    s.frame_size = global_frame ? global_size : patch_size;
    s.sigma = stage == Stage::global ? global_sigma : local_sigma;
    return s;
  }
};

namespace detail {

inline FrameRecord run_stage(const SliceImage& slice, std::string_view sample_id, const StageSpec& spec,
                             const FrameTransform& frame, const Predictor& predictor, int window) {
  const Grid<double> input = extract_frame(slice.pixels(), frame);
  PredictionRequest req{std::string(sample_id), spec, &input, frame};
  const HeatmapStack stack = predictor.predict(req);
  validate_output(stack, spec);

  FrameRecord rec{spec.stage, frame, {}, {}};
  for (std::size_t i = 0; i < stack.size(); ++i) {
    try {
      rec.decoded[stack.names[i]] = decode(stack.channels[i], window);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyHeatmap) throw;
      rec.failed.push_back(stack.names[i]);
    }
  }
  return rec;
}

/// Maps a frame-decoded channel back to original pixels.
inline std::optional<Point2> original(const FrameRecord& rec, std::string_view channel) {
  auto it = rec.decoded.find(std::string(channel));
  if (it == rec.decoded.end()) return std::nullopt;
  return rec.frame.inverse(it->second);
}

inline std::optional<SideScore> try_score(const LandmarkMap& points, Side side, Spacing spacing) {
  try {
    return score_side(points, side, spacing);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::MissingLandmark || e.code() == ErrorCode::DegenerateLandmarks) {
      return std::nullopt;
    }
    throw;
  }
}

inline void score_report(SliceReport& report) {
  report.left = try_score(report.landmarks, Side::left, report.spacing);
  report.right = try_score(report.landmarks, Side::right, report.spacing);
}

}  // namespace detail

/// Single-stage inference: all ten landmarks predicted on the 256 frame,
/// decoded there and mapped back to the original image.
inline SliceReport run_direct(const SliceImage& slice, std::string_view sample_id, const StageBindings& predictors,
                              const PipelineConfig& config) {
  PipelineConfig cfg = config;
  cfg.mode = Mode::direct;
  cfg.validate(predictors);
  SliceReport report;
  report.sample_id = std::string(sample_id);
  report.mode = Mode::direct;
  report.predictor = predictors.direct->tag();
  report.spacing = slice.spacing();

  const FrameTransform frame = global_frame(square_crop_rect(slice.height(), slice.width()), cfg.global_size);
  FrameRecord rec = detail::run_stage(slice, sample_id, cfg.spec(Stage::direct), frame, *predictors.direct,
                                      cfg.decode_window);
  for (const auto& [name, p] : rec.decoded) report.landmarks[name] = frame.inverse(p);
  report.frames.push_back(std::move(rec));
  detail::score_report(report);
  return report;
}

/// Two-stage inference: reference points on the global frame, then refined
/// landmarks on 96x96 patches cut from the original image around them.
inline SliceReport run_g2l(const SliceImage& slice, std::string_view sample_id, const StageBindings& predictors,
                           const PipelineConfig& config) {
  PipelineConfig cfg = config;
  cfg.mode = Mode::g2l;
  cfg.validate(predictors);
  if (slice.height() < cfg.patch_size || slice.width() < cfg.patch_size) {
    throw Error(ErrorCode::PatchTooLarge, "slice smaller than the local patch");
  }
  SliceReport report;
  report.sample_id = std::string(sample_id);
  report.mode = Mode::g2l;
  report.predictor = predictors.global->tag();
  if (predictors.local_kg->tag() != report.predictor || predictors.local_of->tag() != report.predictor) {
    report.predictor += "+" + predictors.local_kg->tag();
    if (predictors.local_of->tag() != predictors.local_kg->tag()) report.predictor += "+" + predictors.local_of->tag();
  }
  report.spacing = slice.spacing();

  const FrameTransform gframe = global_frame(square_crop_rect(slice.height(), slice.width()), cfg.global_size);
  FrameRecord grec = detail::run_stage(slice, sample_id, cfg.spec(Stage::global), gframe, *predictors.global,
                                       cfg.decode_window);
  const auto kg_center = detail::original(grec, kKgCenter);
  const auto of_left = detail::original(grec, landmarks::OF_left);
  const auto of_right = detail::original(grec, landmarks::OF_right);
  report.frames.push_back(std::move(grec));

  auto local = [&](Stage stage, Point2 center, const Predictor& predictor) {
    const FrameTransform pframe = patch_frame(patch_rect(center, cfg.patch_size, slice.height(), slice.width()));
    FrameRecord rec = detail::run_stage(slice, sample_id, cfg.spec(stage), pframe, predictor, cfg.decode_window);
    for (const auto& [name, p] : rec.decoded) {
      std::string target = name;
      if (name == kOrbitalFloor) {
        target = std::string(stage == Stage::local_of_left ? landmarks::OF_left : landmarks::OF_right);
      }
      report.landmarks[target] = pframe.inverse(p);
    }
    report.frames.push_back(std::move(rec));
  };

  if (kg_center) local(Stage::local_kg, *kg_center, *predictors.local_kg);
  if (of_left) local(Stage::local_of_left, *of_left, *predictors.local_of);
  if (of_right) local(Stage::local_of_right, *of_right, *predictors.local_of);

  detail::score_report(report);
  return report;
}

inline SliceReport run(const SliceImage& slice, std::string_view sample_id, const StageBindings& predictors,
                       const PipelineConfig& config) {
  switch (config.mode) {
    case Mode::direct: return run_direct(slice, sample_id, predictors, config);
    case Mode::g2l: return run_g2l(slice, sample_id, predictors, config);
    case Mode::groundtruth: break;
  }
  throw Error(ErrorCode::InvalidArgument, "groundtruth mode has no predictors; use score_groundtruth");
}

/// Reference report computed straight from annotations.
inline SliceReport score_groundtruth(const SliceImage& slice, const AnnotationSet& ann, std::string_view sample_id = {}) {
  if (ann.height() != slice.height() || ann.width() != slice.width()) {
    throw Error(ErrorCode::SchemaViolation, "annotation dimensions do not match the slice");
  }
  SliceReport report;
  report.sample_id = std::string(sample_id);
  report.mode = Mode::groundtruth;
  report.predictor = "groundtruth";
  report.spacing = slice.spacing();
  report.landmarks = ann.points();
  report.left = score_side(ann.points(), Side::left, slice.spacing());
  report.right = score_side(ann.points(), Side::right, slice.spacing());
  return report;
}

}  // namespace skullbase

#endif  // SKULLBASE_PIPELINE_HPP
