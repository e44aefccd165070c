#include <gtest/gtest.h>

#include <map>

#include "skullbase/pipeline.hpp"
#include "skullbase/report_io.hpp"
#include "skullbase/synth.hpp"

namespace skullbase {
namespace {

class ZeroPredictor final : public Predictor {
 public:
  HeatmapStack predict(const PredictionRequest& req) const override {
    HeatmapStack s;
    for (const auto& ch : req.spec.channels) {
      s.names.push_back(ch);
      s.channels.emplace_back(req.spec.frame_size, req.spec.frame_size, 0.0);
    }
    return s;
  }
  std::string tag() const override { return "zero"; }
};

/// Fixed global estimate (original pixels) for every reference channel.
class FixedGlobal final : public Predictor {
 public:
  explicit FixedGlobal(Point2 at) : at_(at) {}
  HeatmapStack predict(const PredictionRequest& req) const override {
    LandmarkMap pts;
    for (const auto& ch : req.spec.channels) pts[ch] = req.frame.forward(at_);
    return encode_stack(pts, req.spec.channels, req.spec.frame_size, req.spec.frame_size, req.spec.sigma);
  }
  std::string tag() const override { return "fixed"; }

 private:
  Point2 at_;
};

struct Fixture {
  std::vector<SyntheticSample> samples = make_dataset(4, 77);
  std::map<std::string, LandmarkMap> truth;
  Fixture() {
    for (const auto& s : samples) truth[s.sample_id] = s.annotations.points();
  }
  TruthLookup lookup() const {
    return [this](const std::string& id) { return truth.at(id); };
  }
};

TEST(Pipeline, GlobalTargetsExample) {
  LandmarkMap m{{"FE_left", {90, 40}}, {"FE_right", {110, 40}}, {"CP_left", {95, 60}}, {"CP_right", {105, 60}},
                {"OF_left", {60, 80}}, {"OF_right", {140, 80}}};
  EXPECT_EQ(global_targets(m).at("KG_CENTER"), (Point2{100, 50}));
}

TEST(Pipeline, DirectOracleMatchesGeneratorClasses) {
  Fixture f;
  const auto oracle = std::make_shared<OraclePredictor>(f.lookup());
  PipelineConfig cfg;
  cfg.mode = Mode::direct;
  for (const auto& s : f.samples) {
    const SliceReport r = run(s.image, s.sample_id, StageBindings::all(oracle), cfg);
    ASSERT_EQ(r.status(), ReportStatus::ok);
    const SliceReport gt = score_groundtruth(s.image, s.annotations, s.sample_id);
    for (Side side : {Side::left, Side::right}) {
      EXPECT_LT(std::abs(r.side(side)->measurements.keros_depth_mm - gt.side(side)->measurements.keros_depth_mm), 0.3);
    }
    EXPECT_EQ(r.frames.size(), 1u);
    EXPECT_EQ(r.landmarks.size(), 10u);
  }
}

TEST(Pipeline, G2lOracleIsCloseAndDeterministic) {
  Fixture f;
  const auto oracle = std::make_shared<OraclePredictor>(f.lookup());
  for (const auto& s : f.samples) {
    const SliceReport a = run(s.image, s.sample_id, StageBindings::all(oracle), {});
    const SliceReport b = run(s.image, s.sample_id, StageBindings::all(oracle), {});
    EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
    ASSERT_EQ(a.frames.size(), 4u);
    EXPECT_EQ(a.frames[0].stage, Stage::global);
    EXPECT_EQ(a.frames[1].stage, Stage::local_kg);
    // CG and SEPT are not predicted in g2l mode.
    EXPECT_EQ(a.landmarks.size(), 8u);
    for (const auto& [name, p] : a.landmarks) EXPECT_LT(distance(p, f.truth[s.sample_id].at(name)), 0.25) << name;
    EXPECT_EQ(a.predictor, "oracle");
  }
}

TEST(Pipeline, AllZeroStackIsUnscorable) {
  Fixture f;
  const auto zero = std::make_shared<ZeroPredictor>();
  PipelineConfig cfg;
  cfg.mode = Mode::direct;
  const auto& s = f.samples.front();
  const SliceReport r = run(s.image, s.sample_id, StageBindings::all(zero), cfg);
  EXPECT_EQ(r.status(), ReportStatus::unscorable);
  EXPECT_EQ(r.frames.at(0).failed.size(), 10u);

  const SliceReport g = run(s.image, s.sample_id, StageBindings::all(zero), {});
  EXPECT_EQ(g.status(), ReportStatus::unscorable);
  EXPECT_EQ(g.frames.size(), 1u);  // no global estimates, so no local stages
}

TEST(Pipeline, CornerGlobalEstimateShiftsPatches) {
  Fixture f;
  const auto& s = f.samples.front();
  const CropRect crop = square_crop_rect(s.image.height(), s.image.width());
  StageBindings b = StageBindings::all(std::make_shared<OraclePredictor>(f.lookup()));
  b.global = std::make_shared<FixedGlobal>(Point2{static_cast<double>(crop.x0), 0.0});
  const SliceReport r = run(s.image, s.sample_id, b, {});
  ASSERT_EQ(r.frames.size(), 4u);
  for (std::size_t i = 1; i < 4; ++i) {
    EXPECT_EQ(r.frames[i].frame.rect.y0, 0);
    EXPECT_GE(r.frames[i].frame.rect.x0, 0);
  }
  EXPECT_EQ(r.predictor, "fixed+oracle");
}

TEST(Pipeline, ConfigValidation) {
  PipelineConfig cfg;
  StageBindings empty;
  EXPECT_THROW(cfg.validate(empty), Error);
  cfg.decode_window = 12;
  EXPECT_THROW(cfg.validate(StageBindings::all(std::make_shared<ZeroPredictor>())), Error);
  Fixture f;
  cfg = {};
  cfg.mode = Mode::groundtruth;
  EXPECT_THROW(run(f.samples[0].image, "x", StageBindings::all(std::make_shared<ZeroPredictor>()), cfg), Error);
}

TEST(Pipeline, ScoreGroundtruthAgreesWithMeasurements) {
  Fixture f;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& s = f.samples[i];
    const SliceReport r = score_groundtruth(s.image, s.annotations, s.sample_id);
    EXPECT_EQ(r.left->classes, score_side(s.annotations.points(), Side::left, s.image.spacing()).classes);
    EXPECT_EQ(r.right->classes, s.params.right.classes);
    EXPECT_EQ(to_json(r).dump(), to_json(score_groundtruth(s.image, s.annotations, s.sample_id)).dump());
  }
}

}  // namespace
}  // namespace skullbase
