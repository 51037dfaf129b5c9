#include <gtest/gtest.h>

#include "raytraj/json_io.hpp"
#include "test_support.hpp"

namespace raytraj {
namespace {

using json_io::json;

constexpr const char* kPanLeft =
    R"({"frames":16,"width":384,"height":256,"motion":{"kind":"pan","direction":[-1,0,0],"interval":0.1},)"
    R"("intrinsics":{"fx":192,"fy":228,"cx":192,"cy":128}})";

SchemaError expect_schema_error(const std::string& text) {
  try {
    json_io::parse_trajectory_spec(text);
  } catch (const SchemaError& e) {
    return e;
  }
  ADD_FAILURE() << "no SchemaError for " << text;
  return SchemaError("", "");
}

TEST(TrajectorySpec, MinimalPanLeft) {
  const synth::SynthesisPlan plan = json_io::parse_trajectory_spec(kPanLeft);
  EXPECT_EQ(plan.frames, 16);
  EXPECT_EQ(plan.width, 384);
  EXPECT_EQ(plan.height, 256);
  EXPECT_EQ(plan.intrinsics, (Intrinsics{192, 228, 192, 128}));
  ASSERT_EQ(plan.motions.size(), 1u);
  const auto& pan = std::get<synth::PanMotion>(plan.motions[0]);
  EXPECT_EQ(pan.direction, Vec3(-1, 0, 0));
  EXPECT_DOUBLE_EQ(pan.interval, 0.1);
}

TEST(TrajectorySpec, MissingFrames) {
  json doc = json::parse(kPanLeft);
  doc.erase("frames");
  const SchemaError e = expect_schema_error(doc.dump());
  EXPECT_EQ(e.path(), "/frames");
  EXPECT_EQ(e.reason(), "required");
}

TEST(TrajectorySpec, IntervalAsString) {
  json doc = json::parse(kPanLeft);
  doc["motion"]["interval"] = "0.1";
  const SchemaError e = expect_schema_error(doc.dump());
  EXPECT_EQ(e.path(), "/motion/interval");
  EXPECT_NE(e.reason().find("expected number"), std::string::npos);
}

TEST(TrajectorySpec, SemanticErrorsCarryPaths) {
  json doc = json::parse(kPanLeft);
  doc["motion"]["direction"] = {1, 1, 0};
  EXPECT_EQ(expect_schema_error(doc.dump()).path(), "/motion/direction");

  doc = json::parse(kPanLeft);
  doc["motion"] = {{"kind", "spin"}};
  EXPECT_EQ(expect_schema_error(doc.dump()).path(), "/motion/kind");

  doc = json::parse(kPanLeft);
  doc["motions"] = json::array({{{"kind", "focal_zoom"}, {"scale", -1.0}}});
  EXPECT_EQ(expect_schema_error(doc.dump()).path(), "/motions/0/scale");

  doc = json::parse(kPanLeft);
  doc["extra"] = 1;
  EXPECT_EQ(expect_schema_error(doc.dump()).path(), "/extra");

  doc = json::parse(kPanLeft);
  doc.erase("motion");
  EXPECT_EQ(expect_schema_error(doc.dump()).path(), "/motion");

  doc = json::parse(kPanLeft);
  doc["width"] = 0;
  EXPECT_EQ(expect_schema_error(doc.dump()).path(), "/width");

  EXPECT_EQ(expect_schema_error("{not json").path(), "/");
}

TEST(TrajectorySpec, AllMotionKinds) {
  json doc = json::parse(kPanLeft);
  doc["motions"] = json::array({
      {{"kind", "zoom"}, {"interval", 0.05}},
      {{"kind", "rotate"}, {"axis", {1, 0, 0}}, {"degrees", 100.0}},
      {{"kind", "rotate"}, {"axis", {0, 1, 0}}, {"degrees", 30.0}, {"orbit_radius", 2.0}},
      {{"kind", "principal_shift"}, {"shift", {2.0, -1.0}}},
      {{"kind", "focal_zoom"}, {"scale", 1.1}},
  });
  const synth::SynthesisPlan plan = json_io::parse_trajectory_spec(doc.dump());
  ASSERT_EQ(plan.motions.size(), 6u);
  EXPECT_EQ(std::get<synth::PanMotion>(plan.motions[1]).direction, Vec3::UnitZ());
  EXPECT_NEAR(std::get<synth::RotateMotion>(plan.motions[2]).total_radians, 100.0 * M_PI / 180.0, 1e-15);
  EXPECT_EQ(std::get<synth::RotateMotion>(plan.motions[3]).orbit_radius, 2.0);
  EXPECT_EQ(std::get<synth::PrincipalShiftMotion>(plan.motions[4]).dy, -1.0);
  EXPECT_EQ(std::get<synth::FocalZoomMotion>(plan.motions[5]).scale, 1.1);
}

TEST(TrajectoryJson, RoundTripIsLossless) {
  testing::Rng rng(5);
  for (Convention c : {Convention::WorldToCamera, Convention::CameraToWorld}) {
    const Trajectory t = testing::random_trajectory(rng, 7, c, 384, 256);
    const Trajectory back = json_io::trajectory_from_json(json_io::trajectory_to_json(t).dump());
    ASSERT_EQ(back.size(), t.size());
    EXPECT_EQ(back.convention(), c);
    EXPECT_EQ(back.width(), 384);
    for (std::size_t i = 0; i < t.size(); ++i) {
      EXPECT_EQ(back[i].intrinsics, t[i].intrinsics);
      EXPECT_EQ(back[i].extrinsics.rotation(), t[i].extrinsics.rotation());
      EXPECT_EQ(back[i].extrinsics.translation(), t[i].extrinsics.translation());
    }
  }
}

TEST(TrajectoryJson, RejectsBadRotation) {
  json doc = json_io::trajectory_to_json(
      Trajectory({{{1, 1, 0, 0}, Extrinsics::identity()}}, 8, 8));
  doc["poses"][0]["R"][1] = 0.5;
  try {
    json_io::trajectory_from_json(doc);
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.path(), "/poses/0/R");
  }
}

TEST(ReportJson, Fields) {
  metrics::AlignmentReport r;
  r.rot_err_total = 0.5;
  r.trans_err_total = 2.0;
  r.trans_err_unsquared = 1.5;
  r.rescale_factor = 0.25;
  r.frames_compared = 2;
  r.per_frame_rot = {0.0, 0.5};
  r.per_frame_trans = {0.0, 2.0};
  r.per_frame_trans_unsquared = {0.0, 1.5};
  const json j = json_io::report_to_json(r);
  EXPECT_EQ(j["rot_err"], 0.5);
  EXPECT_EQ(j["trans_err"], 2.0);
  EXPECT_EQ(j["trans_err_unsquared"], 1.5);
  EXPECT_EQ(j["rescale_factor"], 0.25);
  ASSERT_EQ(j["per_frame"].size(), 2u);
  EXPECT_EQ(j["per_frame"][1]["trans_err"], 2.0);
}

}  // namespace
}  // namespace raytraj
