#ifndef SKULLBASE_PREDICTOR_HPP
#define SKULLBASE_PREDICTOR_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "skullbase/frames.hpp"
#include "skullbase/heatmap.hpp"
#include "skullbase/hmap.hpp"

namespace skullbase {

// ---------------------------------------------------------------------------
// Stages
// ---------------------------------------------------------------------------

enum class Stage { global, direct, local_kg, local_of_left, local_of_right };

/// File suffix used for `<sample_id>.<suffix>.hmap`.
inline const char* to_string(Stage s) {
  switch (s) {
    case Stage::global: return "global";
    case Stage::direct: return "direct";
    case Stage::local_kg: return "local_kg";
    case Stage::local_of_left: return "local_of_left";
    case Stage::local_of_right: return "local_of_right";
  }
  return "?";
}

inline constexpr std::string_view kKgCenter = "KG_CENTER";
inline constexpr std::string_view kOrbitalFloor = "OF";

inline constexpr double kGlobalSigma = 4.0;
inline constexpr double kLocalSigma = 2.0;

struct StageSpec {
  Stage stage = Stage::global;
  std::size_t frame_size = kGlobalFrameSize;
  std::vector<std::string> channels;
  double sigma = kGlobalSigma;
};

/// The channel layout each stage predicts. Direct predictions use the local
/// sigma on the global frame.
inline StageSpec stage_spec(Stage stage) {
  using namespace landmarks;
  switch (stage) {
    case Stage::global:
      return {stage, kGlobalFrameSize,
              {std::string(kKgCenter), std::string(OF_left), std::string(OF_right)}, kGlobalSigma};
    case Stage::direct:
      return {stage, kGlobalFrameSize, default_schema().names(), kLocalSigma};
    case Stage::local_kg:
      return {stage,
              kPatchSize,
              {std::string(FE_left), std::string(CP_left), std::string(ER_left), std::string(FE_right),
               std::string(CP_right), std::string(ER_right)},
              kLocalSigma};
    case Stage::local_of_left:
    case Stage::local_of_right:
      return {stage, kPatchSize, {std::string(kOrbitalFloor)}, kLocalSigma};
  }
  throw Error(ErrorCode::InvalidSpec, "unknown stage");
}

inline void validate_spec(const StageSpec& spec) {
  if (spec.channels.empty()) throw Error(ErrorCode::InvalidSpec, "stage has no channels");
  if (spec.frame_size == 0) throw Error(ErrorCode::InvalidSpec, "stage frame size is zero");
  if (!(spec.sigma > 0.0)) throw Error(ErrorCode::InvalidSpec, "stage sigma must be positive");
}

/// The three global reference points: centroid of FE/CP on both sides and
/// the two orbital floors.
inline LandmarkMap global_targets(const LandmarkMap& ann) {
  using namespace landmarks;
  const Point2 kg = (require_landmark(ann, FE_left) + require_landmark(ann, FE_right) +
                     require_landmark(ann, CP_left) + require_landmark(ann, CP_right)) /
                    4.0;
  return {{std::string(kKgCenter), kg},
          {std::string(OF_left), require_landmark(ann, OF_left)},
          {std::string(OF_right), require_landmark(ann, OF_right)}};
}

/// Ground-truth positions (original-image coordinates) of a stage's channels.
inline LandmarkMap stage_targets(const StageSpec& spec, const LandmarkMap& truth) {
  using namespace landmarks;
  LandmarkMap out;
  if (spec.stage == Stage::global) {
    const LandmarkMap g = global_targets(truth);
    for (const auto& ch : spec.channels) out[ch] = require_landmark(g, ch);
    return out;
  }
  for (const auto& ch : spec.channels) {
    if (ch == kOrbitalFloor) {
      out[ch] = require_landmark(truth, spec.stage == Stage::local_of_right ? OF_right : OF_left);
    } else {
      out[ch] = require_landmark(truth, ch);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Predictor contract
// ---------------------------------------------------------------------------

struct PredictionRequest {
  std::string sample_id;
  StageSpec spec;
  const Grid<double>* image = nullptr;  // frame-sized input
  FrameTransform frame;                 // original -> frame mapping of `image`
};

class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual HeatmapStack predict(const PredictionRequest& request) const = 0;
  virtual std::string tag() const = 0;
};

/// Rejects stacks that do not match the requested stage layout.
inline void validate_output(const HeatmapStack& stack, const StageSpec& spec) {
  if (stack.size() != spec.channels.size() || stack.names.size() != stack.size()) {
    throw Error(ErrorCode::FormatMismatch, "expected " + std::to_string(spec.channels.size()) +
                                               " channels for stage " + to_string(spec.stage) +
                                               ", got " + std::to_string(stack.size()));
  }
  for (std::size_t i = 0; i < stack.size(); ++i) {
    if (stack.names[i] != spec.channels[i]) {
      throw Error(ErrorCode::FormatMismatch, "channel " + std::to_string(i) + " is '" + stack.names[i] +
                                                 "', expected '" + spec.channels[i] + "'");
    }
    const Heatmap& ch = stack.channels[i];
    if (ch.height() != spec.frame_size || ch.width() != spec.frame_size) {
      throw Error(ErrorCode::FormatMismatch, "channel " + stack.names[i] + " is " +
                                                 std::to_string(ch.height()) + "x" + std::to_string(ch.width()) +
                                                 ", expected " + std::to_string(spec.frame_size) + " square");
    }
    for (double v : ch.data()) {
      if (!std::isfinite(v)) throw Error(ErrorCode::FormatMismatch, "non-finite prediction in " + stack.names[i]);
    }
  }
}

/// Renders the stage's target heatmaps from frame-coordinate truth. The image
/// is ignored.
inline HeatmapStack oracle_predict(const Grid<double>& /*image*/, const LandmarkMap& truth_in_frame,
                                   const StageSpec& spec) {
  validate_spec(spec);
  return encode_stack(truth_in_frame, spec.channels, spec.frame_size, spec.frame_size, spec.sigma);
}

namespace detail {
/// 32-bit FNV-1a; stable across platforms, unlike std::hash.
inline std::uint32_t fnv1a(std::string_view s) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : s) {
    h ^= c;
    h *= 16777619u;
  }
  return h;
}
}  // namespace detail

/// Seeded RNG for one (seed, sample, stage, channel) tuple.
inline std::mt19937_64 channel_rng(std::uint64_t seed, std::string_view sample_id, Stage stage,
                                   std::size_t channel) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    detail::fnv1a(sample_id), static_cast<std::uint32_t>(stage),
                    static_cast<std::uint32_t>(channel)};
  return std::mt19937_64(seq);
}

/// As oracle_predict, but every target is displaced by isotropic Gaussian
/// noise (std per axis, frame pixels) before encoding.
inline HeatmapStack noisy_oracle_predict(const Grid<double>& image, const LandmarkMap& truth_in_frame,
                                         const StageSpec& spec, double noise_std, std::uint64_t seed,
                                         std::string_view sample_id) {
  if (!(noise_std >= 0.0)) throw Error(ErrorCode::InvalidArgument, "noise_std must be >= 0");
  if (noise_std == 0.0) return oracle_predict(image, truth_in_frame, spec);
  validate_spec(spec);
  LandmarkMap shifted;
  for (std::size_t i = 0; i < spec.channels.size(); ++i) {
    const auto& ch = spec.channels[i];
    auto rng = channel_rng(seed, sample_id, spec.stage, i);
    std::normal_distribution<double> noise(0.0, noise_std);
    const double dx = noise(rng);
    const double dy = noise(rng);
    shifted[ch] = require_landmark(truth_in_frame, ch) + Point2{dx, dy};
  }
  return encode_stack(shifted, spec.channels, spec.frame_size, spec.frame_size, spec.sigma);
}

/// Looks up ground-truth landmarks (original-image coordinates) by sample id.
using TruthLookup = std::function<LandmarkMap(const std::string& sample_id)>;

inline LandmarkMap truth_in_frame(const PredictionRequest& req, const TruthLookup& truth) {
  LandmarkMap out;
  for (const auto& [name, p] : stage_targets(req.spec, truth(req.sample_id))) {
    out[name] = req.frame.forward(p);
  }
  return out;
}

class OraclePredictor final : public Predictor {
 public:
  explicit OraclePredictor(TruthLookup truth) : truth_(std::move(truth)) {}

  HeatmapStack predict(const PredictionRequest& req) const override {
    return oracle_predict(*req.image, truth_in_frame(req, truth_), req.spec);
  }
  std::string tag() const override { return "oracle"; }

 private:
  TruthLookup truth_;
};

class NoisyOraclePredictor final : public Predictor {
 public:
  NoisyOraclePredictor(TruthLookup truth, double noise_std, std::uint64_t seed)
      : truth_(std::move(truth)), noise_std_(noise_std), seed_(seed) {
    if (!(noise_std >= 0.0)) throw Error(ErrorCode::InvalidArgument, "noise_std must be >= 0");
  }

  HeatmapStack predict(const PredictionRequest& req) const override {
    return noisy_oracle_predict(*req.image, truth_in_frame(req, truth_), req.spec, noise_std_, seed_,
                                req.sample_id);
  }
  std::string tag() const override {
    std::ostringstream os;
    os << "noisy:" << noise_std_;
    return os.str();
  }

 private:
  TruthLookup truth_;
  double noise_std_;
  std::uint64_t seed_;
};

inline std::filesystem::path prediction_path(const std::filesystem::path& dir, std::string_view sample_id,
                                             Stage stage) {
  return dir / (std::string(sample_id) + "." + to_string(stage) + ".hmap");
}

/// Reads `<dir>/<sample_id>.<stage>.hmap` produced by an external model.
inline HeatmapStack file_predict(const std::filesystem::path& dir, std::string_view sample_id,
                                 const StageSpec& spec) {
  const auto path = prediction_path(dir, sample_id, spec.stage);
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::MissingPrediction,
                "no " + std::string(to_string(spec.stage)) + " prediction for sample " +
                    std::string(sample_id) + " (" + path.string() + ")");
  }
  HeatmapStack stack = read_hmap(path);
  validate_output(stack, spec);
  return stack;
}

class FilePredictor final : public Predictor {
 public:
  explicit FilePredictor(std::filesystem::path dir) : dir_(std::move(dir)) {}

  HeatmapStack predict(const PredictionRequest& req) const override {
    return file_predict(dir_, req.sample_id, req.spec);
  }
  std::string tag() const override { return "files:" + dir_.string(); }

 private:
  std::filesystem::path dir_;
};

}  // namespace skullbase

#endif  // SKULLBASE_PREDICTOR_HPP
