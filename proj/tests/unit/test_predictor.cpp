#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "skullbase/predictor.hpp"
#include "skullbase/synth.hpp"

namespace skullbase {
namespace {

LandmarkMap truth_points() {
  LandmarkMap m;
  double x = 100;
  for (const auto& name : default_schema().names()) {
    m[name] = {x, 90 + (x - 100) / 3};
    x += 6.5;
  }
  return m;
}

TEST(StageSpec, Layouts) {
  EXPECT_EQ(stage_spec(Stage::global).channels, (std::vector<std::string>{"KG_CENTER", "OF_left", "OF_right"}));
  EXPECT_EQ(stage_spec(Stage::global).sigma, 4.0);
  EXPECT_EQ(stage_spec(Stage::global).frame_size, 256u);
  EXPECT_EQ(stage_spec(Stage::direct).channels.size(), 10u);
  EXPECT_EQ(stage_spec(Stage::local_kg).channels.size(), 6u);
  EXPECT_EQ(stage_spec(Stage::local_kg).frame_size, 96u);
  EXPECT_EQ(stage_spec(Stage::local_of_right).channels, (std::vector<std::string>{"OF"}));
  EXPECT_STREQ(to_string(Stage::local_of_left), "local_of_left");
}

TEST(StageSpec, GlobalTargetCentroid) {
  LandmarkMap m = truth_points();
  m["FE_left"] = {10, 20};
  m["FE_right"] = {30, 20};
  m["CP_left"] = {14, 40};
  m["CP_right"] = {26, 44};
  const LandmarkMap g = global_targets(m);
  EXPECT_EQ(g.at("KG_CENTER"), (Point2{20, 31}));
  EXPECT_EQ(g.at("OF_left"), m.at("OF_left"));
  m.erase("CP_right");
  EXPECT_THROW(global_targets(m), Error);
}

TEST(Oracle, DecodesBackToFrameTruth) {
  const LandmarkMap truth = truth_points();
  const CropRect rect = square_crop_rect(240, 300);
  const Grid<double> img(256, 256, 0.0);
  OraclePredictor oracle([&](const std::string&) { return truth; });
  PredictionRequest req{"S00001", stage_spec(Stage::global), &img, global_frame(rect)};
  const HeatmapStack out = oracle.predict(req);
  validate_output(out, req.spec);
  const Point2 kg = decode(out.channels[0]);
  const Point2 want = req.frame.forward(global_targets(truth).at("KG_CENTER"));
  // sigma 4 is wide for the 13 px window, so off-grid peaks carry ~0.2 px bias.
  EXPECT_LT(distance(kg, want), 0.3);
}

TEST(Oracle, LocalOfChannelTracksSide) {
  const LandmarkMap truth = truth_points();
  const Grid<double> img(96, 96, 0.0);
  OraclePredictor oracle([&](const std::string&) { return truth; });
  for (Stage st : {Stage::local_of_left, Stage::local_of_right}) {
    const std::string full = st == Stage::local_of_left ? "OF_left" : "OF_right";
    const FrameTransform f = patch_frame(patch_rect(truth.at(full), 96, 300, 400));
    const HeatmapStack out = oracle.predict({"S1", stage_spec(st), &img, f});
    EXPECT_LT(distance(f.inverse(decode(out.channels[0])), truth.at(full)), 0.1);
  }
}

TEST(NoisyOracle, DeterministicAndSeedSensitive) {
  const LandmarkMap truth = truth_points();
  const Grid<double> img(256, 256, 0.0);
  const StageSpec spec = stage_spec(Stage::global);
  LandmarkMap frame_truth;
  for (const auto& [n, p] : global_targets(truth)) frame_truth[n] = p;
  const auto a = noisy_oracle_predict(img, frame_truth, spec, 2.0, 7, "S00001");
  const auto b = noisy_oracle_predict(img, frame_truth, spec, 2.0, 7, "S00001");
  const auto c = noisy_oracle_predict(img, frame_truth, spec, 2.0, 8, "S00001");
  const auto d = noisy_oracle_predict(img, frame_truth, spec, 2.0, 7, "S00002");
  EXPECT_EQ(a.channels, b.channels);
  EXPECT_NE(a.channels, c.channels);
  EXPECT_NE(a.channels, d.channels);
  EXPECT_EQ(noisy_oracle_predict(img, frame_truth, spec, 0.0, 7, "S00001").channels,
            oracle_predict(img, frame_truth, spec).channels);
  EXPECT_THROW(noisy_oracle_predict(img, frame_truth, spec, -1.0, 7, "S"), Error);
}

TEST(NoisyOracle, TagAndErrorScale) {
  NoisyOraclePredictor p([](const std::string&) { return LandmarkMap{}; }, 1.5, 0);
  EXPECT_EQ(p.tag(), "noisy:1.5");
  // Mean radial displacement of 2-D isotropic noise is std * sqrt(pi / 2).
  const StageSpec spec = stage_spec(Stage::local_of_left);
  const Grid<double> img(96, 96, 0.0);
  const LandmarkMap t{{"OF", {48, 48}}};
  double sum = 0;
  const int n = 600;
  for (int i = 0; i < n; ++i) {
    const auto out = noisy_oracle_predict(img, t, spec, 1.0, 11, "S" + std::to_string(i));
    sum += distance(decode(out.channels[0]), {48, 48});
  }
  EXPECT_NEAR(sum / n, 1.2533141373155001, 0.125);
}

TEST(ValidateOutput, RejectsWrongLayouts) {
  const StageSpec spec = stage_spec(Stage::local_of_left);
  HeatmapStack ok{{"OF"}, {Heatmap(96, 96, 0.1)}};
  EXPECT_NO_THROW(validate_output(ok, spec));
  HeatmapStack wrong_name{{"XX"}, {Heatmap(96, 96, 0.1)}};
  HeatmapStack wrong_size{{"OF"}, {Heatmap(95, 96, 0.1)}};
  HeatmapStack wrong_count{{}, {}};
  HeatmapStack nan{{"OF"}, {Heatmap(96, 96, std::nan(""))}};
  for (const auto* s : {&wrong_name, &wrong_size, &wrong_count, &nan}) {
    try {
      validate_output(*s, spec);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::FormatMismatch);
    }
  }
}

TEST(FilePredictor, ReadsStageFilesAndReportsMissing) {
  const auto dir = std::filesystem::temp_directory_path() / "skullbase_filepred";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const StageSpec spec = stage_spec(Stage::local_of_right);
  const HeatmapStack stack = encode_stack(LandmarkMap{{"OF", {40.5, 52.25}}}, spec.channels, 96, 96, 2.0);
  write_hmap(stack, prediction_path(dir, "S00003", Stage::local_of_right));
  EXPECT_EQ(prediction_path(dir, "S00003", Stage::local_of_right).filename(), "S00003.local_of_right.hmap");

  FilePredictor fp(dir);
  const Grid<double> img(96, 96, 0.0);
  const HeatmapStack got = fp.predict({"S00003", spec, &img, {}});
  EXPECT_LT(distance(decode(got.channels[0]), {40.5, 52.25}), 0.05);
  try {
    fp.predict({"S00004", spec, &img, {}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingPrediction);
  }
  // A file with the wrong layout is a format mismatch, not a crash.
  write_hmap(stack, prediction_path(dir, "S00005", Stage::local_kg));
  EXPECT_THROW(fp.predict({"S00005", stage_spec(Stage::local_kg), &img, {}}), Error);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace skullbase
