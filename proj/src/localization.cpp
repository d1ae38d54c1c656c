#include <irisloc/localization.hpp>
#include <irisloc/morphology.hpp>

#include <numbers>
#include <optional>
#include <vector>

namespace irisloc {

void LocalizationConfig::validate() const {
  auto check_range = [](const RadiusRange& r, const char* name) {
    if (!(0 < r.min && r.min < r.max)) {
      throw InvalidArgument(std::string(name) + ": need 0 < min < max, got [" +
                            std::to_string(r.min) + "," + std::to_string(r.max) + "]");
    }
  };
  check_range(pupil_radius_range, "pupil_radius_range");
  check_range(iris_radius_range, "iris_radius_range");
  if (!(openness_threshold > 0.0 && openness_threshold <= 1.0)) {
    throw InvalidArgument("openness_threshold must lie in (0, 1]");
  }
  if (hough_center_stride < 1) throw InvalidArgument("hough_center_stride must be >= 1");
  if (!(horiz_ratio > 0.0)) throw InvalidArgument("horiz_ratio must be positive");
}

PupilIris split_pupil_iris(const LabelMask& mask) {
  const BinaryMask iris_plane = class_plane(mask, Label::Iris);
  const BinaryMask pupil_plane = class_plane(mask, Label::Pupil);
  const BinaryMask raw = largest_component(iris_plane | pupil_plane);
  if (raw.empty()) throw EmptyEye("no iris or pupil pixels in mask");

  BinaryMask iris_disk = fill_holes(raw);
  BinaryMask pupil = pupil_plane & iris_disk;
  if (pupil.empty()) {
    // No pupil labels: the pupil is the hole of the iris annulus.
    const BinaryMask iris_only = raw & iris_plane;
    pupil = (fill_holes(iris_only) ^ iris_only) & iris_disk;
  }
  return {std::move(pupil), std::move(iris_disk)};
}

EllipseFit mass_center_fit(const BinaryMask& region) {
  if (region.empty()) throw EmptyEye("mass_center_fit: empty region");
  const PixelList px = region.pixels();
  const Eigen::RowVector2d centroid = px.colwise().mean();
  const Eigen::RowVector2d lo = px.colwise().minCoeff();
  const Eigen::RowVector2d hi = px.colwise().maxCoeff();
  const Eigen::RowVector2d half = (hi - lo).array() / 2.0 + 0.5;
  return {centroid(0), centroid(1), half(0), half(1)};
}

namespace {

// Integer offsets whose Euclidean length rounds to r.
std::vector<Eigen::Vector2i> ring_offsets(int r) {
  std::vector<Eigen::Vector2i> out;
  for (int dy = -r - 1; dy <= r + 1; ++dy) {
    for (int dx = -r - 1; dx <= r + 1; ++dx) {
      if (std::lround(std::sqrt(double(dx * dx + dy * dy))) == r) out.emplace_back(dx, dy);
    }
  }
  return out;
}

}  // namespace

EllipseFit hough_circle_fit(const BinaryMask& edges, RadiusRange range, int center_stride,
                            double min_support) {
  if (!(0 < range.min && range.min <= range.max)) {
    throw InvalidArgument("hough_circle_fit: invalid radius range");
  }
  if (center_stride < 1) throw InvalidArgument("hough_circle_fit: stride must be >= 1");
  const PixelList px = edges.pixels();
  if (px.rows() == 0) throw NoCircle("hough_circle_fit: no edge pixels");

  const int w = edges.width();
  const int h = edges.height();
  Eigen::Array<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> acc(h, w);

  double best_score = -1.0;
  EllipseFit best;
  for (int r = range.min; r <= range.max; ++r) {
    acc.setZero();
    const auto ring = ring_offsets(r);
    for (Eigen::Index i = 0; i < px.rows(); ++i) {
      const int ex = static_cast<int>(px(i, 0));
      const int ey = static_cast<int>(px(i, 1));
      for (const auto& d : ring) {
        const int cx = ex - d.x();
        const int cy = ey - d.y();
        if (cx < 0 || cy < 0 || cx >= w || cy >= h) continue;
        if (cx % center_stride != 0 || cy % center_stride != 0) continue;
        ++acc(cy, cx);
      }
    }
    Eigen::Index by = 0;
    Eigen::Index bx = 0;
    const std::int32_t peak = acc.maxCoeff(&by, &bx);
    const double score = peak / (2.0 * std::numbers::pi * r);
    if (score > best_score) {
      best_score = score;
      best = EllipseFit::circle(double(bx), double(by), double(r));
    }
  }
  if (best_score < min_support) {
    throw NoCircle("hough_circle_fit: peak support " + std::to_string(best_score) +
                   " below " + std::to_string(min_support));
  }
  return best;
}

double openness_ratio(const BinaryMask& iris_disk) {
  if (iris_disk.empty()) throw EmptyEye("openness_ratio: empty region");
  const auto& b = iris_disk.bits();
  const auto cols = b.colwise().any();
  const auto rows = b.rowwise().any();
  auto extent = [](const auto& v) {
    Eigen::Index first = 0;
    Eigen::Index last = v.size() - 1;
    while (!v(first)) ++first;
    while (!v(last)) --last;
    return double(last - first + 1);
  };
  return extent(rows) / extent(cols);
}

FrameMeasurement mixed_fit(const LabelMask& mask, const LocalizationConfig& cfg) {
  cfg.validate();
  const auto [pupil_raw, iris_disk] = split_pupil_iris(mask);
  const BinaryMask pupil_region = fill_holes(largest_component(pupil_raw));
  if (pupil_region.empty()) throw EmptyEye("no pupil pixels in mask");

  const BinaryMask pupil_edges = contour(pupil_region);
  const BinaryMask iris_edges =
      suppress_horizontal_edges(contour(iris_disk), iris_disk, cfg.horiz_ratio);

  FrameMeasurement m;
  m.method = Method::Mixed;
  m.openness = openness_ratio(iris_disk);
  m.pupil = mass_center_fit(pupil_region);

  std::optional<EllipseFit> lms;
  try {
    lms = lms_circle_fit(iris_edges.pixels());
  } catch (const DegenerateFit&) {
  }

  const bool partially_closed = m.openness < cfg.openness_threshold;
  if (partially_closed || !lms) {
    try {
      m.iris = hough_circle_fit(iris_edges, cfg.iris_radius_range, cfg.hough_center_stride);
      m.method = Method::Hough;
    } catch (const NoCircle&) {
      if (!lms) throw;
      m.iris = *lms;
    }
  } else {
    m.iris = *lms;
  }

  if (partially_closed && m.pupil.mean_radius() < cfg.pupil_radius_range.min) {
    const BinaryMask pupil_lid_free =
        suppress_horizontal_edges(pupil_edges, pupil_region, cfg.horiz_ratio);
    try {
      m.pupil = hough_circle_fit(pupil_lid_free, cfg.pupil_radius_range, cfg.hough_center_stride);
      m.method = Method::Hough;
    } catch (const NoCircle&) {
      // keep the mass-center estimate
    }
  }

  m.ratio = pupil_iris_ratio(m.pupil, m.iris);
  m.inverted_geometry = m.pupil.mean_radius() > m.iris.mean_radius();
  return m;
}

}  // namespace irisloc
