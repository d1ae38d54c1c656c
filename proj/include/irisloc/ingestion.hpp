#pragma once

#include <irisloc/geometry.hpp>
#include <irisloc/localization.hpp>
#include <irisloc/mask.hpp>

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace irisloc {

enum class Eye { Left, Right };
enum class Cohort { Alcohol, NoAlcohol };
enum class RegionClass { Sclera, Iris, Pupil };

std::string_view to_string(Eye e);
std::string_view to_string(Cohort c);
std::string_view to_string(RegionClass c);
Eye eye_from_string(std::string_view s);
Cohort cohort_from_string(std::string_view s);
RegionClass region_class_from_string(std::string_view s);

struct Region {
  std::vector<Eigen::Vector2d> polygon;
  RegionClass cls{RegionClass::Pupil};
  Eye eye{Eye::Left};
};

struct Annotation {
  std::string image_id;
  std::vector<Region> regions;
};

/// Parses a VIA project or region export. Accepted layout:
///
///   { "<key>": { "filename": "...", "regions": [
///       { "shape_attributes": { "name": "polygon",
///                               "all_points_x": [...], "all_points_y": [...] },
///         "region_attributes": { "class": "pupil|iris|sclera",
///                                "eye": "left|right" } } ] } }
///
/// optionally wrapped in "_via_img_metadata". `regions` may also be an object
/// keyed by index (VIA 1.x). image_id is the filename, or the key when absent.
/// Entries appear in file order. Errors name the image and region index.
std::vector<Annotation> parse_annotations(std::string_view json);

/// Even-odd scanline fill sampled at pixel centers, boundary pixels included.
/// Paint order sclera, iris, pupil. Restricts to one eye when `eye` is set.
LabelMask rasterize(const Annotation& ann, int width, int height,
                    std::optional<Eye> eye = std::nullopt);

/// Fills `polygon` into `bits` with the same rule as rasterize().
void fill_polygon(BitGrid& bits, const std::vector<Eigen::Vector2d>& polygon);

/// Capture protocol sessions: 0, 15, 30, 45 and 60 minutes after intake.
inline constexpr int kMaxSession = 4;
inline constexpr double kDefaultFrameRate = 20.0;

struct SessionMeta {
  std::string subject_id;
  int session{0};
  Eye eye{Eye::Left};
  Cohort cohort{Cohort::NoAlcohol};
  double frame_rate{kDefaultFrameRate};

  void validate() const;
};

struct SessionRecord {
  SessionMeta meta;
  /// Frames in strictly increasing frame_idx order.
  std::vector<FrameMeasurement> frames;
  /// Frame indices that are missing or could not be localized.
  std::vector<std::int64_t> gaps;
  std::vector<std::string> warnings;
};

inline constexpr const char* kManifestName = "manifest.txt";
inline constexpr const char* kTruthName = "truth.csv";

/// Flat key=value text: subject_id, session, eye, cohort, frame_rate.
/// Blank lines and '#' comments are ignored.
SessionMeta parse_manifest(std::string_view text);
std::string write_manifest(const SessionMeta& meta);

/// Numbered masks <frame_idx>.pgm in `dir`, keyed by index, in order.
std::vector<std::pair<std::int64_t, std::filesystem::path>> list_frame_files(
    const std::filesystem::path& dir);

/// Decodes every <frame_idx>.pgm in `dir` and localizes it with mixed_fit.
/// Missing indices and EmptyEye/NoCircle frames are recorded as gaps.
SessionRecord load_session(const std::filesystem::path& dir, const LocalizationConfig& cfg = {});

inline constexpr const char* kMeasurementsHeader =
    "subject_id,session,eye,cohort,frame_idx,t,pupil_cx,pupil_cy,pupil_rx,pupil_ry,"
    "iris_cx,iris_cy,iris_rx,iris_ry,ratio,openness,method";

/// Header plus one row per frame; real values with 4 decimals.
std::string write_measurements_csv(const SessionRecord& rec);

/// Inverse of write_measurements_csv. Rows are grouped into one record per
/// (subject_id, session, eye, cohort) in order of first appearance.
std::vector<SessionRecord> parse_measurements_csv(std::string_view csv);

std::string read_text_file(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames, so readers never see a partial file.
void write_text_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace irisloc
