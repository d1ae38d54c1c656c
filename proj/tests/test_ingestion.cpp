#include <irisloc/ingestion.hpp>
#include <irisloc/synth.hpp>

#include <gtest/gtest.h>

#include "temp_dir.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace irisloc {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

std::string region_json(const std::vector<std::pair<double, double>>& pts, const std::string& cls,
                        const std::string& eye) {
  std::string xs, ys;
  for (const auto& [x, y] : pts) {
    xs += (xs.empty() ? "" : ",") + std::to_string(x);
    ys += (ys.empty() ? "" : ",") + std::to_string(y);
  }
  std::string attrs;
  if (!cls.empty()) attrs += "\"class\":\"" + cls + "\"";
  if (!eye.empty()) attrs += std::string(attrs.empty() ? "" : ",") + "\"eye\":\"" + eye + "\"";
  return R"({"shape_attributes":{"name":"polygon","all_points_x":[)" + xs +
         R"(],"all_points_y":[)" + ys + R"(]},"region_attributes":{)" + attrs + "}}";
}

std::string image_json(const std::string& file, const std::vector<std::string>& regions) {
  std::string r;
  for (const auto& s : regions) r += (r.empty() ? "" : ",") + s;
  return "\"" + file + "123\":{\"filename\":\"" + file + "\",\"size\":123,\"regions\":[" + r +
         "],\"file_attributes\":{}}";
}

const std::vector<std::pair<double, double>> kTriangle{{1, 1}, {8, 1}, {4, 7}};

TEST(ParseAnnotations, MinimalTriangle) {
  const auto json = "{" + image_json("a.png", {region_json(kTriangle, "pupil", "left")}) + "}";
  const auto anns = parse_annotations(json);
  ASSERT_EQ(anns.size(), 1u);
  EXPECT_EQ(anns[0].image_id, "a.png");
  ASSERT_EQ(anns[0].regions.size(), 1u);
  const auto& r = anns[0].regions[0];
  EXPECT_EQ(r.cls, RegionClass::Pupil);
  EXPECT_EQ(r.eye, Eye::Left);
  ASSERT_EQ(r.polygon.size(), 3u);
  EXPECT_EQ(r.polygon[2], Eigen::Vector2d(4, 7));
}

TEST(ParseAnnotations, MissingClassNamesRegion) {
  const auto json = "{" + image_json("a.png", {region_json(kTriangle, "", "left")}) + "}";
  try {
    parse_annotations(json);
    FAIL();
  } catch (const IngestError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("region 0"), std::string::npos) << what;
    EXPECT_NE(what.find("a.png"), std::string::npos) << what;
    EXPECT_NE(what.find("class"), std::string::npos) << what;
  }
}

TEST(ParseAnnotations, OtherErrors) {
  EXPECT_THROW(parse_annotations("{not json"), IngestError);
  EXPECT_THROW(parse_annotations("[]"), IngestError);
  const auto no_eye = "{" + image_json("b.png", {region_json(kTriangle, "iris", "")}) + "}";
  EXPECT_THROW(parse_annotations(no_eye), IngestError);
  const auto two_pts = "{" + image_json("b.png", {region_json({{0, 0}, {1, 1}}, "iris", "left")}) + "}";
  try {
    parse_annotations(two_pts);
    FAIL();
  } catch (const IngestError& e) {
    EXPECT_NE(std::string(e.what()).find("region 0"), std::string::npos);
  }
  const auto bad_cls = "{" + image_json("b.png", {region_json(kTriangle, "eyebrow", "left")}) + "}";
  EXPECT_THROW(parse_annotations(bad_cls), IngestError);
}

TEST(ParseAnnotations, TwoImagesThreeRegionsEach) {
  const std::vector<std::string> regions{region_json(kTriangle, "sclera", "left"),
                                         region_json(kTriangle, "iris", "left"),
                                         region_json(kTriangle, "pupil", "right")};
  const auto json = "{\"_via_settings\":{},\"_via_img_metadata\":{" + image_json("z.png", regions) +
                    "," + image_json("a.png", regions) + "}}";
  const auto anns = parse_annotations(json);
  ASSERT_EQ(anns.size(), 2u);
  EXPECT_EQ(anns[0].image_id, "z.png");  // file order
  EXPECT_EQ(anns[1].image_id, "a.png");
  for (const auto& a : anns) {
    ASSERT_EQ(a.regions.size(), 3u);
    EXPECT_EQ(a.regions[0].cls, RegionClass::Sclera);
    EXPECT_EQ(a.regions[2].eye, Eye::Right);
  }
}

TEST(ParseAnnotations, RegionsAsObject) {
  const std::string json = R"({"x.png":{"filename":"x.png","regions":{"0":)" +
                           region_json(kTriangle, "Iris", "Right") + "}}}";
  const auto anns = parse_annotations(json);
  ASSERT_EQ(anns.at(0).regions.size(), 1u);
  EXPECT_EQ(anns[0].regions[0].cls, RegionClass::Iris);
}

Annotation square(double lo, double hi, RegionClass cls, Eye eye = Eye::Left) {
  return {"sq", {{{{lo, lo}, {hi, lo}, {hi, hi}, {lo, hi}}, cls, eye}}};
}

std::int64_t count(const LabelMask& m, Label l) { return class_plane(m, l).popcount(); }

TEST(Rasterize, SquareIsInclusive) {
  const auto m = rasterize(square(10, 20, RegionClass::Pupil), 32, 32);
  EXPECT_EQ(count(m, Label::Pupil), 121);
  EXPECT_EQ(m.at(10, 10), Label::Pupil);
  EXPECT_EQ(m.at(20, 20), Label::Pupil);
  EXPECT_EQ(m.at(21, 20), Label::Background);
}

TEST(Rasterize, PaintOrderInnerOverOuter) {
  Annotation ann = square(2, 28, RegionClass::Iris);
  // Pupil listed before iris must still end up on top.
  ann.regions.insert(ann.regions.begin(), square(10, 20, RegionClass::Pupil).regions[0]);
  ann.regions.push_back(square(0, 31, RegionClass::Sclera).regions[0]);
  const auto m = rasterize(ann, 32, 32);
  EXPECT_EQ(count(m, Label::Pupil), 121);
  EXPECT_EQ(count(m, Label::Iris), 27 * 27 - 121);
  EXPECT_EQ(count(m, Label::Sclera), 32 * 32 - 27 * 27);
  EXPECT_EQ(m.at(15, 15), Label::Pupil);
}

TEST(Rasterize, EmptyAndEyeFilterAndClipping) {
  EXPECT_EQ(rasterize(Annotation{"e", {}}, 8, 8), LabelMask(8, 8));
  const auto right = square(2, 5, RegionClass::Iris, Eye::Right);
  EXPECT_EQ(rasterize(right, 8, 8, Eye::Left), LabelMask(8, 8));
  EXPECT_EQ(count(rasterize(right, 8, 8, Eye::Right), Label::Iris), 16);
  EXPECT_EQ(count(rasterize(square(-10, 50, RegionClass::Sclera), 8, 6), Label::Sclera), 48);
}

TEST(Rasterize, TriangleEvenOdd) {
  // Right triangle with legs of 10 along the axes: pixel centers with
  // x, y >= 0 and x + y <= 10 -> 66 pixels.
  const Annotation tri{"t", {{{{0, 0}, {10, 0}, {0, 10}}, RegionClass::Iris, Eye::Left}}};
  EXPECT_EQ(count(rasterize(tri, 16, 16), Label::Iris), 66);
  // Self-intersecting bow tie: even-odd leaves no double fill issues.
  const Annotation bow{"b", {{{{0, 0}, {10, 10}, {10, 0}, {0, 10}}, RegionClass::Iris, Eye::Left}}};
  const auto m = rasterize(bow, 16, 16);
  EXPECT_EQ(m.at(5, 5), Label::Iris);
  EXPECT_EQ(m.at(5, 1), Label::Background);
  EXPECT_EQ(m.at(1, 5), Label::Iris);
}

TEST(Rasterize, DegeneratePolygonIsThinLine) {
  const Annotation line{"l", {{{{0, 3}, {10, 3}, {5, 3}}, RegionClass::Pupil, Eye::Left}}};
  const auto m = rasterize(line, 16, 8);
  EXPECT_EQ(count(m, Label::Pupil), 11);
  for (int x = 0; x <= 10; ++x) EXPECT_EQ(m.at(x, 3), Label::Pupil);
}

TEST(Rasterize, SixtyFourGonAreaAndDeterminism) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> r_dist(7, 60);
  std::uniform_real_distribution<double> c_dist(70, 90);
  for (int trial = 0; trial < 50; ++trial) {
    const double r = r_dist(rng), cx = c_dist(rng), cy = c_dist(rng);
    Region reg{{}, RegionClass::Iris, Eye::Left};
    for (int k = 0; k < 64; ++k) {
      const double a = 2 * std::numbers::pi * k / 64;
      reg.polygon.emplace_back(cx + r * std::cos(a), cy + r * std::sin(a));
    }
    const Annotation ann{"c", {reg}};
    const auto m = rasterize(ann, 160, 160);
    const double area = std::numbers::pi * r * r;
    EXPECT_NEAR(double(count(m, Label::Iris)), area, 0.03 * area) << "r=" << r;
    EXPECT_EQ(m, rasterize(ann, 160, 160));
  }
}

// ---------------------------------------------------------------------------

TEST(Manifest, ParseAndValidate) {
  const auto meta = parse_manifest("# session file\nsubject_id = S01\nsession=2\neye=right\ncohort=alcohol\n");
  EXPECT_EQ(meta.subject_id, "S01");
  EXPECT_EQ(meta.session, 2);
  EXPECT_EQ(meta.eye, Eye::Right);
  EXPECT_EQ(meta.cohort, Cohort::Alcohol);
  EXPECT_EQ(meta.frame_rate, kDefaultFrameRate);
  EXPECT_EQ(parse_manifest(write_manifest(meta)).subject_id, "S01");

  EXPECT_THROW(parse_manifest("subject_id=a\nsession=7\neye=left\ncohort=alcohol\n"), IngestError);
  EXPECT_THROW(parse_manifest("subject_id=a\neye=left\ncohort=alcohol\n"), IngestError);
  EXPECT_THROW(parse_manifest("subject_id=a\nsession=1\neye=up\ncohort=alcohol\n"), IngestError);
  EXPECT_THROW(parse_manifest("subject_id=a\nsession=1\neye=left\ncohort=alcohol\nframe_rate=0\n"),
               IngestError);
  EXPECT_THROW(parse_manifest("garbage line\n"), IngestError);
}

SessionPlan small_plan(int frames) {
  CohortSpec spec;
  spec.frames = frames;
  spec.width = 160;
  spec.height = 160;
  spec.iris_radius = 35;
  spec.seed = 3;
  return gen_cohort(spec).at(0);
}

TEST(LoadSession, HundredFramesAtTwentyFps) {
  TempDir dir("load");
  write_session_dir(dir.path(), small_plan(100));
  const auto rec = load_session(dir.path());
  ASSERT_EQ(rec.frames.size(), 100u);
  EXPECT_TRUE(rec.gaps.empty());
  EXPECT_DOUBLE_EQ(rec.frames.front().t, 0.0);
  EXPECT_DOUBLE_EQ(rec.frames.back().t, 4.95);
  for (std::size_t i = 1; i < rec.frames.size(); ++i) {
    EXPECT_GT(rec.frames[i].t, rec.frames[i - 1].t);
    EXPECT_GT(rec.frames[i].frame_idx, rec.frames[i - 1].frame_idx);
  }
}

TEST(LoadSession, GapsAreRecorded) {
  TempDir dir("gaps");
  write_session_dir(dir.path(), small_plan(4));
  fs::remove(dir / "2.pgm");
  // An unlocalizable frame is a gap, not a failure.
  write_mask_file((dir / "5.pgm").string(), LabelMask(160, 160));
  const auto rec = load_session(dir.path());
  ASSERT_EQ(rec.frames.size(), 3u);
  EXPECT_EQ(rec.frames[2].frame_idx, 3);
  EXPECT_EQ(rec.gaps, (std::vector<std::int64_t>{2, 4, 5}));
  bool warned = false;
  for (const auto& w : rec.warnings) warned |= w.find("gap in frame indices at 2") != std::string::npos;
  EXPECT_TRUE(warned);
}

TEST(LoadSession, Errors) {
  TempDir dir("errs");
  EXPECT_THROW(load_session(dir / "nope"), IngestError);
  write_mask_file((dir / "0.pgm").string(), LabelMask(4, 4));
  EXPECT_THROW(load_session(dir.path()), IngestError);  // no manifest
  write_text_file_atomic(dir / kManifestName, "subject_id=a\nsession=7\neye=left\ncohort=alcohol\n");
  EXPECT_THROW(load_session(dir.path()), IngestError);
  write_text_file_atomic(dir / kManifestName, "subject_id=a\nsession=1\neye=left\ncohort=alcohol\n");
  write_text_file_atomic(dir / "1.pgm", "P5\n1 1\n255\nx");
  EXPECT_THROW(load_session(dir.path()), CodecError);
}

// ---------------------------------------------------------------------------

TEST(MeasurementsCsv, HeaderOnlyAndOneRow) {
  SessionRecord rec;
  rec.meta = {"S1", 0, Eye::Left, Cohort::NoAlcohol, 20.0};
  EXPECT_EQ(write_measurements_csv(rec), std::string(kMeasurementsHeader) + "\n");

  FrameMeasurement f;
  f.frame_idx = 3;
  f.t = 0.15;
  f.pupil = {10.123456, 20, 9, 9};
  f.iris = {10, 20, 40, 40};
  f.ratio = 0.225;
  f.openness = 1.0;
  rec.frames.push_back(f);
  const auto csv = write_measurements_csv(rec);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
  EXPECT_NE(csv.find("S1,0,left,no_alcohol,3,0.1500,10.1235,20.0000,9.0000,9.0000,10.0000,20.0000,"
                     "40.0000,40.0000,0.2250,1.0000,Mixed"),
            std::string::npos)
      << csv;
}

TEST(MeasurementsCsv, RoundTripToFourDecimals) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0, 300);
  for (int trial = 0; trial < 50; ++trial) {
    SessionRecord rec;
    rec.meta = {"subj" + std::to_string(trial), trial % 5, trial % 2 ? Eye::Right : Eye::Left,
                trial % 3 ? Cohort::Alcohol : Cohort::NoAlcohol, 20.0};
    for (int i = 0; i < 20; ++i) {
      FrameMeasurement f;
      f.frame_idx = i * 2;
      f.t = i * 0.1;
      f.pupil = {u(rng), u(rng), u(rng) / 10, u(rng) / 10};
      f.iris = {u(rng), u(rng), u(rng) / 3, u(rng) / 3};
      f.ratio = pupil_iris_ratio(f.pupil, f.iris);
      f.openness = u(rng) / 300;
      f.method = static_cast<Method>(i % 4);
      rec.frames.push_back(f);
    }
    const auto csv = write_measurements_csv(rec);
    const auto back = parse_measurements_csv(csv);
    ASSERT_EQ(back.size(), 1u);
    const auto& r = back[0];
    EXPECT_EQ(r.meta.subject_id, rec.meta.subject_id);
    EXPECT_EQ(r.meta.session, rec.meta.session);
    EXPECT_EQ(r.meta.eye, rec.meta.eye);
    EXPECT_EQ(r.meta.cohort, rec.meta.cohort);
    ASSERT_EQ(r.frames.size(), rec.frames.size());
    for (std::size_t i = 0; i < r.frames.size(); ++i) {
      const auto& a = r.frames[i];
      const auto& b = rec.frames[i];
      EXPECT_EQ(a.frame_idx, b.frame_idx);
      EXPECT_EQ(a.method, b.method);
      for (const auto [x, y] : {std::pair{a.t, b.t}, {a.pupil.cx, b.pupil.cx}, {a.pupil.cy, b.pupil.cy},
                                {a.pupil.rx, b.pupil.rx}, {a.pupil.ry, b.pupil.ry}, {a.iris.cx, b.iris.cx},
                                {a.iris.cy, b.iris.cy}, {a.iris.rx, b.iris.rx}, {a.iris.ry, b.iris.ry},
                                {a.ratio, b.ratio}, {a.openness, b.openness}}) {
        EXPECT_NEAR(x, y, 0.5e-4 + 1e-12);
      }
    }
    // Written output is a fixed point after one round trip.
    EXPECT_EQ(write_measurements_csv(r), csv);
  }
}

TEST(MeasurementsCsv, GroupsSessionsAndRejectsBadInput) {
  SessionRecord a;
  a.meta = {"A", 0, Eye::Left, Cohort::Alcohol, 20.0};
  a.frames.push_back({});
  SessionRecord b = a;
  b.meta.eye = Eye::Right;
  const auto csv = write_measurements_csv(a) + write_measurements_csv(b).substr(std::string(kMeasurementsHeader).size() + 1);
  EXPECT_EQ(parse_measurements_csv(csv).size(), 2u);

  EXPECT_THROW(parse_measurements_csv("a,b\n"), IngestError);
  EXPECT_THROW(parse_measurements_csv(std::string(kMeasurementsHeader) + "\n1,2,3\n"), IngestError);
  const auto dup = write_measurements_csv(a) + write_measurements_csv(a).substr(std::string(kMeasurementsHeader).size() + 1);
  EXPECT_THROW(parse_measurements_csv(dup), IngestError);
}

}  // namespace
}  // namespace irisloc
