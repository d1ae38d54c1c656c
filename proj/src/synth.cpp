#include <irisloc/synth.hpp>

#include <array>
#include <cstdio>
#include <cmath>
#include <numbers>

namespace irisloc {

namespace fs = std::filesystem;

double SeededRng::normal(double mean, double sd) {
  const double u1 = uniform01();
  const double u2 = uniform01();
  return mean + sd * std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

constexpr int kFirstHarmonic = 2;
constexpr int kHarmonics = 5;

// Smooth closed-curve perturbation with max |f| <= 1. Harmonic 1 is left out
// so jitter does not shift the region's center.
class RadialProfile {
 public:
  explicit RadialProfile(SeededRng& rng) {
    double total = 0.0;
    for (auto& a : amp_) {
      a = rng.uniform(0.0, 1.0);
      total += a;
    }
    for (auto& p : phase_) p = rng.uniform(0.0, 2.0 * std::numbers::pi);
    if (total > 0.0) {
      for (auto& a : amp_) a /= total;
    }
  }

  double operator()(double theta) const {
    double f = 0.0;
    for (int k = 0; k < kHarmonics; ++k) {
      f += amp_[k] * std::cos((k + kFirstHarmonic) * theta + phase_[k]);
    }
    return f;
  }

 private:
  std::array<double, kHarmonics> amp_{};
  std::array<double, kHarmonics> phase_{};
};

bool inside(const EllipseFit& e, const RadialProfile& profile, double jitter, double x, double y) {
  const double u = (x - e.cx) / e.rx;
  const double v = (y - e.cy) / e.ry;
  const double rho = std::sqrt(u * u + v * v);
  if (jitter <= 0.0) return rho <= 1.0;
  const double band = jitter / std::min(e.rx, e.ry);
  if (rho <= 1.0 - band) return true;
  if (rho > 1.0 + band) return false;
  const double limit = 1.0 + jitter * profile(std::atan2(y - e.cy, x - e.cx)) / e.mean_radius();
  return rho <= limit;
}

double analytic_openness(const EllipseFit& iris, double occlusion) {
  const double y_cut = iris.cy - iris.ry + 2.0 * occlusion * iris.ry;
  double half_width = iris.rx;
  if (y_cut > iris.cy) {
    const double v = (y_cut - iris.cy) / iris.ry;
    half_width = iris.rx * std::sqrt(std::max(0.0, 1.0 - v * v));
  }
  return half_width > 0.0 ? (1.0 - occlusion) * iris.ry / half_width : 0.0;
}

}  // namespace

void EyeSpec::validate() const {
  if (width <= 0 || height <= 0) throw InvalidArgument("EyeSpec: canvas must be positive");
  if (!iris.valid() || !pupil.valid() || iris.rx <= 0 || iris.ry <= 0 || pupil.rx <= 0 ||
      pupil.ry <= 0) {
    throw InvalidArgument("EyeSpec: radii must be positive and finite");
  }
  if (!(occlusion_fraction >= 0.0 && occlusion_fraction < 1.0)) {
    throw InvalidArgument("EyeSpec: occlusion_fraction must lie in [0, 1)");
  }
  if (!(boundary_jitter >= 0.0)) throw InvalidArgument("EyeSpec: boundary_jitter must be >= 0");
  const double pr = pupil.mean_radius();
  if (pr < pupil_radius_limits.min || pr > pupil_radius_limits.max) {
    throw InvalidArgument("EyeSpec: pupil radius " + std::to_string(pr) + " outside [" +
                          std::to_string(pupil_radius_limits.min) + ", " +
                          std::to_string(pupil_radius_limits.max) + "]");
  }
  const double offset = (pupil.center() - iris.center()).norm();
  if (offset + std::max(pupil.rx, pupil.ry) + 2.0 * boundary_jitter > std::min(iris.rx, iris.ry)) {
    throw InvalidArgument("EyeSpec: pupil exceeds iris");
  }
}

SyntheticEye gen_eye(const EyeSpec& spec) {
  spec.validate();
  SeededRng rng(spec.seed);
  const RadialProfile sclera_profile(rng);
  const RadialProfile iris_profile(rng);
  const RadialProfile pupil_profile(rng);

  const EllipseFit sclera{spec.iris.cx, spec.iris.cy, 2.2 * spec.iris.rx, 1.25 * spec.iris.ry};
  const double y_cut = spec.iris.cy - spec.iris.ry + 2.0 * spec.occlusion_fraction * spec.iris.ry;
  const double j = spec.boundary_jitter;

  LabelGrid grid = LabelGrid::Zero(spec.height, spec.width);
  for (int y = 0; y < spec.height; ++y) {
    if (spec.occlusion_fraction > 0.0 && y < y_cut) continue;
    for (int x = 0; x < spec.width; ++x) {
      Label l = Label::Background;
      if (inside(sclera, sclera_profile, j, x, y)) l = Label::Sclera;
      if (inside(spec.iris, iris_profile, j, x, y)) l = Label::Iris;
      if (inside(spec.pupil, pupil_profile, j, x, y)) l = Label::Pupil;
      grid(y, x) = static_cast<std::uint8_t>(l);
    }
  }

  FrameMeasurement truth;
  truth.pupil = spec.pupil;
  truth.iris = spec.iris;
  truth.ratio = pupil_iris_ratio(spec.pupil, spec.iris);
  truth.openness = analytic_openness(spec.iris, spec.occlusion_fraction);
  truth.method = Method::Mixed;
  return {LabelMask(std::move(grid)), truth};
}

void CohortSpec::validate() const {
  if (n_subjects < 1) throw InvalidArgument("CohortSpec: n_subjects must be >= 1");
  if (frames < 1) throw InvalidArgument("CohortSpec: frames must be >= 1");
  if (!(frame_rate > 0.0)) throw InvalidArgument("CohortSpec: frame_rate must be positive");
  if (session < 0 || session > kMaxSession) throw InvalidArgument("CohortSpec: session outside 0-4");
  if (width <= 0 || height <= 0) throw InvalidArgument("CohortSpec: canvas must be positive");
  if (!(iris_radius > 0.0)) throw InvalidArgument("CohortSpec: iris_radius must be positive");
  if (subject_radius_sd < 0 || subject_iris_sd < 0 || subject_center_spread < 0 ||
      boundary_jitter < 0) {
    throw InvalidArgument("CohortSpec: spreads must be non-negative");
  }
}

std::vector<SessionPlan> gen_cohort(const CohortSpec& spec) {
  spec.validate();
  const bool alcohol = spec.cohort == Cohort::Alcohol;
  std::vector<SessionPlan> plans;
  plans.reserve(static_cast<std::size_t>(spec.n_subjects));
  for (int i = 0; i < spec.n_subjects; ++i) {
    const std::uint64_t subject_seed = mix_seed(spec.seed, static_cast<std::uint64_t>(i));
    SeededRng rng(subject_seed);
    const double radius_delta = rng.normal(0.0, spec.subject_radius_sd);
    const double iris_r = spec.iris_radius + rng.normal(0.0, spec.subject_iris_sd);
    const double cx = spec.width / 2.0 + rng.uniform(-spec.subject_center_spread, spec.subject_center_spread);
    const double cy = spec.height / 2.0 + rng.uniform(-spec.subject_center_spread, spec.subject_center_spread);

    SessionPlan plan;
    char id[32];
    std::snprintf(id, sizeof id, "%c%03d", alcohol ? 'A' : 'N', i + 1);
    plan.meta = {id, spec.session, spec.eye, spec.cohort, spec.frame_rate};

    for (int f = 0; f < spec.frames; ++f) {
      const double t = f / spec.frame_rate;
      const auto& d = spec.dynamics;
      const double r = d.base_radius + radius_delta + (alcohol ? d.dilation_offset : 0.0) +
                       d.initial_excess * std::exp(-d.constriction_rate * t);
      // Sub-pixel drift decorrelates rasterization error between frames.
      const double fx = cx + rng.uniform(-0.5, 0.5);
      const double fy = cy + rng.uniform(-0.5, 0.5);
      EyeSpec eye;
      eye.width = spec.width;
      eye.height = spec.height;
      eye.iris = EllipseFit::circle(fx, fy, iris_r);
      eye.pupil = EllipseFit::circle(fx, fy, r);
      eye.boundary_jitter = spec.boundary_jitter;
      eye.seed = mix_seed(subject_seed, static_cast<std::uint64_t>(f) + 1);
      plan.frames.push_back(eye);
    }
    plans.push_back(std::move(plan));
  }
  return plans;
}

SessionRecord truth_record(const SessionPlan& plan) {
  SessionRecord rec;
  rec.meta = plan.meta;
  for (std::size_t f = 0; f < plan.frames.size(); ++f) {
    const auto& eye = plan.frames[f];
    FrameMeasurement m;
    m.frame_idx = static_cast<std::int64_t>(f);
    m.t = static_cast<double>(f) / plan.meta.frame_rate;
    m.pupil = eye.pupil;
    m.iris = eye.iris;
    m.ratio = pupil_iris_ratio(eye.pupil, eye.iris);
    m.openness = analytic_openness(eye.iris, eye.occlusion_fraction);
    m.method = Method::Mixed;
    rec.frames.push_back(m);
  }
  return rec;
}

void write_session_dir(const fs::path& dir, const SessionPlan& plan) {
  fs::create_directories(dir);
  for (std::size_t f = 0; f < plan.frames.size(); ++f) {
    const auto eye = gen_eye(plan.frames[f]);
    write_mask_file((dir / (std::to_string(f) + ".pgm")).string(), eye.mask);
  }
  write_text_file_atomic(dir / kManifestName, write_manifest(plan.meta));
  write_text_file_atomic(dir / kTruthName, write_measurements_csv(truth_record(plan)));
}

std::string session_dir_name(const SessionMeta& meta) {
  return meta.subject_id + "_s" + std::to_string(meta.session) + "_" + std::string(to_string(meta.eye));
}

}  // namespace irisloc
