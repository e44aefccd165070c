#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "skullbase/synth.hpp"

namespace skullbase {
namespace {

TEST(Synth, ClinicalMixSumsToOne) {
  EXPECT_NO_THROW(ClassMix::clinical().validate());
  EXPECT_NO_THROW(ClassMix::uniform().validate());
  ClassMix bad = ClassMix::uniform();
  bad.gera = {0.5, 0.5, 0.5};
  EXPECT_THROW(bad.validate(), Error);
  EXPECT_THROW(sample_params(1, bad), Error);
}

TEST(Synth, ParamsAreDeterministic) {
  const AnatomyParams a = sample_params(42), b = sample_params(42), c = sample_params(43);
  EXPECT_EQ(phantom_landmarks(a), phantom_landmarks(b));
  EXPECT_NE(phantom_landmarks(a), phantom_landmarks(c));
  EXPECT_EQ(render_phantom(a).first.pixels(), render_phantom(b).first.pixels());
}

TEST(Synth, LandmarksReproduceSampledClasses) {
  for (const ClassMix& mix : {ClassMix::clinical(), ClassMix::uniform()}) {
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
      const AnatomyParams p = sample_params(seed, mix);
      const LandmarkMap pts = phantom_landmarks(p);
      for (Side side : {Side::left, Side::right}) {
        const SideScore s = score_side(pts, side, p.spacing);
        const SideAnatomy& want = p.side(side);
        ASSERT_EQ(s.classes, want.classes) << "seed " << seed;
        EXPECT_NEAR(s.measurements.keros_depth_mm, want.keros_mm, 1e-9);
        EXPECT_NEAR(s.measurements.gera_angle_deg, want.gera_deg, 1e-9);
        EXPECT_NEAR(s.measurements.tms1_mm, want.tms1_mm, 1e-9);
        EXPECT_NEAR(s.measurements.tms2_mm, want.tms2_mm, 1e-9);
      }
    }
  }
}

TEST(Synth, GeometryStaysInsideMarginsAndPatches) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const AnatomyParams p = sample_params(seed, ClassMix::uniform());
    const LandmarkMap pts = phantom_landmarks(p);
    EXPECT_NO_THROW(check_margins(pts, p.height, p.width));
    EXPECT_LE(p.height, p.width);
    // All six Keros/Gera landmarks fit one 96 px patch around their centroid.
    const Point2 kg = (pts.at("FE_left") + pts.at("FE_right") + pts.at("CP_left") + pts.at("CP_right")) / 4.0;
    for (const char* n : {"FE_left", "CP_left", "ER_left", "FE_right", "CP_right", "ER_right"}) {
      EXPECT_LT(std::abs(pts.at(n).x - kg.x), 48.0 - 8.0) << n << " seed " << seed;
      EXPECT_LT(std::abs(pts.at(n).y - kg.y), 48.0 - 8.0) << n << " seed " << seed;
    }
  }
}

TEST(Synth, RenderedImageIsValid) {
  const AnatomyParams p = sample_params(5);
  auto [img, ann] = render_phantom(p, "P00001", "S00001");
  EXPECT_EQ(img.height(), p.height);
  EXPECT_EQ(img.width(), p.width);
  EXPECT_EQ(ann.points(), phantom_landmarks(p));
  double peak = 0;
  for (double v : img.pixels().data()) peak = std::max(peak, v);
  EXPECT_GT(peak, 0.6);
}

TEST(Synth, MixConvergesToClinicalShares) {
  const ClassMix mix = ClassMix::clinical();
  std::array<std::array<int, 3>, 3> counts{};
  const int n = 5000;  // two sides each
  for (int i = 0; i < n; ++i) {
    const AnatomyParams p = sample_params(static_cast<std::uint64_t>(i) * 7919u);
    for (const SideAnatomy* s : {&p.left, &p.right}) {
      ++counts[0][index(s->classes.keros)];
      ++counts[1][index(s->classes.gera)];
      ++counts[2][index(s->classes.tms)];
    }
  }
  const std::array<ClassProbabilities, 3> want{mix.keros, mix.gera, mix.tms};
  for (int m = 0; m < 3; ++m)
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(counts[m][c] / (2.0 * n), want[m][c], 0.02) << m << "," << c;
}

TEST(Synth, PatientAssignment) {
  const auto ids = assign_patients(2000, 9);
  ASSERT_EQ(ids.size(), 2000u);
  const std::set<std::string> unique(ids.begin(), ids.end());
  const double dup_rate = 1.0 - static_cast<double>(unique.size()) / 2000.0;
  EXPECT_GT(dup_rate, 0.03);
  EXPECT_LT(dup_rate, 0.11);
  for (std::size_t i = 2; i < ids.size(); ++i) EXPECT_FALSE(ids[i] == ids[i - 1] && ids[i] == ids[i - 2]);
  const auto singles = assign_patients(100, 9, false);
  EXPECT_EQ(std::set<std::string>(singles.begin(), singles.end()).size(), 100u);
  EXPECT_EQ(format_id('S', 7), "S00007");
}

TEST(Synth, GenerateDatasetWritesFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "skullbase_synth_test";
  std::filesystem::remove_all(dir);
  const auto manifest = generate_dataset(3, 1, ClassMix::clinical(), dir);
  ASSERT_EQ(manifest.size(), 3u);
  EXPECT_TRUE(std::filesystem::exists(dir / "manifest.json"));
  for (const auto& e : manifest) {
    EXPECT_TRUE(std::filesystem::exists(dir / e.image));
    EXPECT_TRUE(std::filesystem::exists(dir / e.annotations));
  }
  const Manifest m = read_manifest(dir / "manifest.json");
  const LoadedSample s = load_sample(m, m.entries.front());
  const SyntheticSample ref = make_sample(0, 1, manifest.front().patient_id);
  EXPECT_EQ(s.annotations.points().size(), 10u);
  for (const auto& [name, p] : ref.annotations.points()) {
    EXPECT_NEAR(s.annotations.points().at(name).x, p.x, 1e-6);
    EXPECT_NEAR(s.annotations.points().at(name).y, p.y, 1e-6);
  }
  // 16-bit storage quantises intensities to 1 / 65535.
  for (std::size_t i = 0; i < ref.image.pixels().data().size(); ++i)
    ASSERT_NEAR(s.image.pixels().data()[i], ref.image.pixels().data()[i], 1.0 / 65535.0);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace skullbase
