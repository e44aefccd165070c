#include <gtest/gtest.h>

#include "skullbase/core.hpp"

namespace skullbase {
namespace {

LandmarkMap some_points() {
  LandmarkMap m;
  double x = 20.0;
  for (const auto& name : default_schema().names()) {
    m[name] = {x, 30.0};
    x += 5.0;
  }
  return m;
}

TEST(Schema, DefaultHasTenUniqueNames) {
  const auto& schema = default_schema();
  ASSERT_EQ(schema.size(), 10u);
  EXPECT_EQ(schema.mirror("FE_left"), "FE_right");
  EXPECT_EQ(schema.mirror("CG"), "CG");
  EXPECT_EQ(schema.mirror("SEPT"), "SEPT");
  EXPECT_EQ(schema.side("OF_right"), Side::right);
  EXPECT_EQ(schema.side("CG"), Side::midline);
}

TEST(Schema, MirrorIsInvolution) {
  const auto& schema = default_schema();
  for (const auto& name : schema.names()) {
    EXPECT_EQ(schema.mirror(schema.mirror(name)), name) << name;
  }
}

TEST(Schema, RejectsBrokenRegistries) {
  auto entries = default_schema().entries();
  auto dup = entries;
  dup[1].name = dup[0].name;
  EXPECT_THROW(LandmarkSchema{dup}, Error);

  auto short_list = entries;
  short_list.pop_back();
  EXPECT_THROW(LandmarkSchema{short_list}, Error);

  auto not_involution = entries;
  not_involution[0].mirror = "CP_right";  // FE_left -> CP_right, but CP_right -> CP_left
  EXPECT_THROW(LandmarkSchema{not_involution}, Error);

  auto bad_midline = entries;
  bad_midline[8].mirror = "SEPT";
  bad_midline[9].mirror = "CG";
  EXPECT_THROW(LandmarkSchema{bad_midline}, Error);
}

TEST(Schema, CustomCompositionIsAccepted) {
  std::vector<LandmarkSchema::Entry> entries;
  for (int i = 0; i < 5; ++i) {
    const std::string l = "A" + std::to_string(i) + "_left";
    const std::string r = "A" + std::to_string(i) + "_right";
    entries.push_back({l, Side::left, r});
    entries.push_back({r, Side::right, l});
  }
  LandmarkSchema schema(entries);
  EXPECT_EQ(schema.mirror("A3_right"), "A3_left");
}

TEST(SliceImage, IngestValidation) {
  EXPECT_NO_THROW(SliceImage(Grid<double>(4, 6, 0.5), {0.45, 0.45}));
  EXPECT_NO_THROW(SliceImage(Grid<double>(5, 5, 1.0), {0.3, 0.3}));
  try {
    SliceImage(Grid<double>(7, 6, 0.5), {0.45, 0.45});
    FAIL() << "portrait image accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotLandscape);
  }
  EXPECT_THROW(SliceImage(Grid<double>(4, 6, 0.5), {0.0, 0.45}), Error);
  EXPECT_THROW(SliceImage(Grid<double>(4, 6, 0.5), {0.45, -1.0}), Error);
  EXPECT_THROW(SliceImage(Grid<double>(4, 6, 1.5), {0.45, 0.45}), Error);
  EXPECT_THROW(SliceImage(Grid<double>(4, 6, -0.1), {0.45, 0.45}), Error);
  EXPECT_THROW(SliceImage(Grid<double>(0, 6), {0.45, 0.45}), Error);
}

TEST(AnnotationSet, RequiresFullCoverage) {
  auto pts = some_points();
  EXPECT_NO_THROW(AnnotationSet(pts, 100, 200));
  auto missing = pts;
  missing.erase("ER_left");
  try {
    AnnotationSet(missing, 100, 200);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingLandmark);
  }
  auto extra = pts;
  extra["NOSE"] = {1, 1};
  EXPECT_THROW(AnnotationSet(extra, 100, 200), Error);
}

TEST(AnnotationSet, RequiresInBoundsPoints) {
  auto pts = some_points();
  pts["CG"] = {199.5, 10};
  EXPECT_NO_THROW(AnnotationSet(pts, 100, 200));
  pts["CG"] = {200.0, 10};
  EXPECT_THROW(AnnotationSet(pts, 100, 200), Error);
  pts["CG"] = {10, -0.01};
  EXPECT_THROW(AnnotationSet(pts, 100, 200), Error);
  pts["CG"] = {std::nan(""), 10};
  EXPECT_THROW(AnnotationSet(pts, 100, 200), Error);
}

TEST(Classes, StringRoundTrip) {
  for (ClassLabel c : kAllClasses) EXPECT_EQ(class_from_string(to_string(c)), c);
  EXPECT_THROW(class_from_string("IV"), Error);
}

}  // namespace
}  // namespace skullbase
