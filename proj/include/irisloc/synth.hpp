#pragma once

#include <irisloc/geometry.hpp>
#include <irisloc/ingestion.hpp>
#include <irisloc/localization.hpp>
#include <irisloc/mask.hpp>

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

namespace irisloc {

/// Reproducible random source. The engine is std::mt19937_64 (fully specified
/// by the C++ standard); the derived draws are spelled out here rather than
/// left to the implementation-defined std:: distributions:
///   uniform01  = (next() >> 11) * 2^-53
///   normal     = Box-Muller, sqrt(-2 ln(1 - u1)) * cos(2 pi u2), one value per call
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  double normal(double mean, double sd);

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; derives independent child seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

struct EyeSpec {
  int width{320};
  int height{320};
  EllipseFit iris{160.0, 160.0, 40.0, 40.0};
  EllipseFit pupil{160.0, 160.0, 9.0, 9.0};
  /// Fraction of the iris height removed from the top by a horizontal lid chord.
  double occlusion_fraction{0.0};
  /// Peak radial boundary displacement, pixels.
  double boundary_jitter{0.0};
  std::uint64_t seed{0};
  /// Accepted range for the pupil mean radius.
  RadiusRange pupil_radius_limits{5, 25};

  /// Throws InvalidArgument (pupil outside iris, bad sizes, occlusion >= 1).
  void validate() const;
};

struct SyntheticEye {
  LabelMask mask;
  /// Pre-jitter ellipses, their ratio and the analytic openness.
  FrameMeasurement truth;
};

/// Sclera ellipse around the iris, iris, pupil, then the lid chord, each class
/// boundary displaced by a seeded smooth radial perturbation.
SyntheticEye gen_eye(const EyeSpec& spec);

/// Pupil radius over time:
///   r(t) = base + subject_delta + (alcohol ? dilation_offset : 0) + initial_excess * exp(-rate t)
struct PupilDynamics {
  double base_radius{9.0};
  double dilation_offset{0.0};
  double constriction_rate{1.0};  // 1/s
  double initial_excess{3.0};     // px above base at t = 0
};

struct CohortSpec {
  int n_subjects{1};
  Cohort cohort{Cohort::NoAlcohol};
  PupilDynamics dynamics;
  std::uint64_t seed{0};
  int frames{100};
  double frame_rate{kDefaultFrameRate};
  int session{0};
  Eye eye{Eye::Left};
  int width{320};
  int height{320};
  double iris_radius{40.0};
  /// Standard deviations of the per-subject variation.
  double subject_radius_sd{0.25};
  double subject_iris_sd{2.0};
  double subject_center_spread{10.0};
  double boundary_jitter{0.0};

  void validate() const;
};

/// One subject's session: metadata plus a generator spec per frame.
struct SessionPlan {
  SessionMeta meta;
  std::vector<EyeSpec> frames;
};

/// Subject i is generated from mix_seed(seed, i), independent of the cohort,
/// so the same seed yields the same subjects in both cohorts.
std::vector<SessionPlan> gen_cohort(const CohortSpec& spec);

/// Ground-truth record for a plan (no masks are rendered).
SessionRecord truth_record(const SessionPlan& plan);

/// Writes <frame>.pgm for every frame, manifest.txt and truth.csv into `dir`.
void write_session_dir(const std::filesystem::path& dir, const SessionPlan& plan);

/// Directory name used for a plan inside a cohort tree.
std::string session_dir_name(const SessionMeta& meta);

}  // namespace irisloc
