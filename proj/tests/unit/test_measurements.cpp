#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "skullbase/measurements.hpp"

namespace skullbase {
namespace {

LandmarkMap side_points(Side side, Point2 fe, Point2 cp, Point2 er, Point2 of) {
  using landmarks::side_name;
  return {{side_name("FE", side), fe}, {side_name("CP", side), cp}, {side_name("ER", side), er},
          {side_name("OF", side), of}};
}

TEST(Keros, Depth) {
  EXPECT_NEAR(keros_depth({120, 50}, {118, 62}, 0.45), 5.4, 1e-12);
  EXPECT_EQ(keros_depth({120, 50}, {100, 50}, 0.45), 0.0);
  EXPECT_NEAR(keros_depth({0, 10}, {0, 40}, 0.3), 9.0, 1e-12);
  EXPECT_THROW(keros_depth({0, 0}, {0, 1}, 0.0), Error);
}

TEST(Gera, Angle) {
  EXPECT_NEAR(gera_angle({100, 50}, {110, 80}, 0.45, 0.45), 71.56505117707799, 1e-9);
  EXPECT_EQ(gera_angle({100, 50}, {100, 80}, 0.45, 0.45), 90.0);
  EXPECT_NEAR(gera_angle({100, 50}, {110, 80}, 0.3, 0.45), 77.47119229084849, 1e-9);
  EXPECT_EQ(gera_angle({100, 50}, {110, 50}, 0.45, 0.45), 0.0);
  try {
    gera_angle({5, 5}, {5, 5}, 0.45, 0.45);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateLandmarks);
  }
}

TEST(Gera, InvariantUnderUniformSpacingScale) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> c(0, 200), s(0.1, 2.0);
  for (int i = 0; i < 100; ++i) {
    const Point2 fe{c(rng), c(rng)}, cp{c(rng), c(rng)};
    const double sx = s(rng), sy = s(rng), k = s(rng);
    EXPECT_NEAR(gera_angle(fe, cp, sx, sy), gera_angle(fe, cp, k * sx, k * sy), 1e-9);
  }
}

TEST(Tms, Distances) {
  auto [d1, d2] = tms_distances({80, 120}, {150, 100}, {110, 95}, 0.45);
  EXPECT_NEAR(d1, 9.0, 1e-12);
  EXPECT_NEAR(d2, 11.25, 1e-12);
  auto [z1, z2] = tms_distances({1, 7}, {50, 7}, {90, 7}, 0.45);
  EXPECT_EQ(z1, 0.0);
  EXPECT_EQ(z2, 0.0);
  auto [e1, e2] = tms_distances({0, 100}, {0, 75}, {0, 78}, 0.45);
  EXPECT_NEAR(e1, 11.25, 1e-12);
  EXPECT_NEAR(e2, 9.9, 1e-12);
}

TEST(Classify, RepresentativeValues) {
  EXPECT_EQ(classify_keros(3.99), ClassLabel::I);
  EXPECT_EQ(classify_keros(5.4), ClassLabel::II);
  EXPECT_EQ(classify_keros(8.5), ClassLabel::III);
  EXPECT_EQ(classify_gera(85), ClassLabel::I);
  EXPECT_EQ(classify_gera(60), ClassLabel::II);
  EXPECT_EQ(classify_gera(30), ClassLabel::III);
  EXPECT_EQ(classify_tms(12.0, 11.0), ClassLabel::I);
  EXPECT_EQ(classify_tms(9.0, 11.25), ClassLabel::II);
  EXPECT_EQ(classify_tms(11.25, 9.0), ClassLabel::II);
  EXPECT_EQ(classify_tms(9.0, 9.5), ClassLabel::III);
}

TEST(Classify, BoundaryRules) {
  EXPECT_EQ(classify_keros(4.0), ClassLabel::II);
  EXPECT_EQ(classify_keros(8.0), ClassLabel::II);
  EXPECT_EQ(classify_keros(std::nextafter(8.0, 9.0)), ClassLabel::III);
  EXPECT_EQ(classify_keros(std::nextafter(4.0, 0.0)), ClassLabel::I);
  EXPECT_EQ(classify_gera(80.0), ClassLabel::II);
  EXPECT_EQ(classify_gera(45.0), ClassLabel::II);
  EXPECT_EQ(classify_gera(std::nextafter(80.0, 90.0)), ClassLabel::I);
  EXPECT_EQ(classify_gera(std::nextafter(45.0, 0.0)), ClassLabel::III);
  EXPECT_EQ(classify_tms(10.0, 10.0), ClassLabel::I);
  EXPECT_EQ(classify_tms(10.0, 9.999), ClassLabel::II);
}

TEST(ScoreSide, ComposesTheSixOperations) {
  const auto pts = side_points(Side::left, {100, 50}, {110, 80}, {110, 95}, {80, 100});
  // Keros: 30 px * 0.45 = 13.5 mm; Gera: atan(30/10); TMS: (20, 5) px.
  const SideScore s = score_side(pts, Side::left, {0.45, 0.45});
  EXPECT_NEAR(s.measurements.keros_depth_mm, 13.5, 1e-12);
  EXPECT_NEAR(s.measurements.gera_angle_deg, 71.56505117707799, 1e-9);
  EXPECT_NEAR(s.measurements.tms1_mm, 9.0, 1e-12);
  EXPECT_NEAR(s.measurements.tms2_mm, 2.25, 1e-12);
  EXPECT_EQ(s.classes, (RiskClasses{ClassLabel::III, ClassLabel::II, ClassLabel::III}));
}

TEST(ScoreSide, WorkedExampleAllClassII) {
  // FE/CP 12 px apart vertically (5.4 mm) with a 71.565 deg lamella; OF 20 px
  // below CP and 25 px below ER.
  const Point2 cp{118, 62};
  const Point2 fe{cp.x - 4, cp.y - 12};
  const Point2 of{80, cp.y + 20};
  const Point2 er{110, of.y - 25};
  const SideScore s = score_side(side_points(Side::right, fe, cp, er, of), Side::right, {0.45, 0.45});
  EXPECT_NEAR(s.measurements.keros_depth_mm, 5.4, 1e-12);
  EXPECT_NEAR(s.measurements.gera_angle_deg, 71.56505117707799, 1e-9);
  EXPECT_NEAR(s.measurements.tms1_mm, 9.0, 1e-12);
  EXPECT_NEAR(s.measurements.tms2_mm, 11.25, 1e-12);
  EXPECT_EQ(s.classes, (RiskClasses{ClassLabel::II, ClassLabel::II, ClassLabel::II}));
}

TEST(ScoreSide, VerticalDeepLamella) {
  const double dy = 9.0 / 0.45;
  const auto pts = side_points(Side::left, {100, 100 - dy}, {100, 100}, {120, 60}, {60, 140});
  const SideScore s = score_side(pts, Side::left, {0.45, 0.45});
  EXPECT_EQ(s.classes.keros, ClassLabel::III);
  EXPECT_EQ(s.classes.gera, ClassLabel::I);
}

TEST(ScoreSide, MissingLandmark) {
  auto pts = side_points(Side::left, {100, 50}, {110, 80}, {110, 95}, {80, 100});
  pts.erase("ER_left");
  try {
    score_side(pts, Side::left, {0.45, 0.45});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingLandmark);
  }
  EXPECT_THROW(score_side(pts, Side::midline, {0.45, 0.45}), Error);
}

TEST(ScoreSide, TranslationAndFlipInvariance) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> c(60, 200), t(-40, 40);
  const double w = 320;
  for (int i = 0; i < 200; ++i) {
    LandmarkMap pts;
    for (Side side : {Side::left, Side::right}) {
      auto sp = side_points(side, {c(rng), c(rng)}, {c(rng), c(rng)}, {c(rng), c(rng)}, {c(rng), c(rng)});
      pts.insert(sp.begin(), sp.end());
    }
    const Spacing sp{0.45, 0.45};
    const double shift = t(rng);
    LandmarkMap moved, flipped;
    for (const auto& [name, p] : pts) moved[name] = {p.x + shift, p.y};
    for (const auto& [name, p] : pts) {
      const std::string mirror = name.ends_with("_left") ? name.substr(0, name.size() - 5) + "_right"
                                                         : name.substr(0, name.size() - 6) + "_left";
      flipped[mirror] = {w - 1 - p.x, p.y};
    }
    const SideScore a = score_side(pts, Side::left, sp);
    const SideScore b = score_side(moved, Side::left, sp);
    const SideScore f = score_side(flipped, Side::right, sp);
    EXPECT_NEAR(a.measurements.keros_depth_mm, b.measurements.keros_depth_mm, 1e-12);
    EXPECT_NEAR(a.measurements.tms1_mm, b.measurements.tms1_mm, 1e-12);
    EXPECT_NEAR(a.measurements.tms2_mm, b.measurements.tms2_mm, 1e-12);
    EXPECT_NEAR(a.measurements.keros_depth_mm, f.measurements.keros_depth_mm, 1e-9);
    EXPECT_NEAR(a.measurements.gera_angle_deg, f.measurements.gera_angle_deg, 1e-9);
    EXPECT_NEAR(a.measurements.tms1_mm, f.measurements.tms1_mm, 1e-9);
    EXPECT_NEAR(a.measurements.tms2_mm, f.measurements.tms2_mm, 1e-9);
  }
}

}  // namespace
}  // namespace skullbase
