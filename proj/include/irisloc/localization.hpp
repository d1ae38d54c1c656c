#pragma once

#include <irisloc/errors.hpp>
#include <irisloc/geometry.hpp>
#include <irisloc/mask.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <sstream>

namespace irisloc {

struct RadiusRange {
  int min{5};
  int max{25};
};

struct LocalizationConfig {
  RadiusRange pupil_radius_range{5, 25};
  RadiusRange iris_radius_range{20, 80};
  /// Below this vertical/horizontal iris extent ratio the eye counts as
  /// partially closed and the Hough refit runs.
  double openness_threshold{0.6};
  int hough_center_stride{1};
  double horiz_ratio{2.0};

  /// Throws InvalidArgument when a field is out of range.
  void validate() const;
};

struct PupilIris {
  BinaryMask pupil;
  BinaryMask iris_disk;
};

/// Separates the pupil and the filled iris disk from a label mask.
/// Throws EmptyEye when the mask has no iris or pupil pixels.
PupilIris split_pupil_iris(const LabelMask& mask);

/// Centroid plus half of the horizontal and vertical pixel extents.
EllipseFit mass_center_fit(const BinaryMask& region);

/// Condition numbers above this mark the normal equations as singular.
inline constexpr double kMaxCircleCondition = 1e12;

/// Algebraic (Kasa) least-squares circle through an N x 2 set of points:
/// minimizes sum (x^2 + y^2 + D x + E y + F)^2 via the 3x3 normal equations.
/// Points are centered and scaled before the solve. Exact on co-circular
/// input. Throws DegenerateFit for fewer than 3 points or collinear points.
template <typename Derived>
Ellipse<typename Derived::Scalar> lms_circle_fit(const Eigen::MatrixBase<Derived>& points) {
  using Scalar = typename Derived::Scalar;
  using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
  using Mat3 = Eigen::Matrix<Scalar, 3, 3>;
  static_assert(Derived::ColsAtCompileTime == 2 || Derived::ColsAtCompileTime == Eigen::Dynamic,
                "points must be an N x 2 matrix");

  if (points.cols() != 2) throw InvalidArgument("lms_circle_fit: points must have two columns");
  const Eigen::Index n = points.rows();
  if (n < 3) {
    throw DegenerateFit("lms_circle_fit: need at least 3 points, got " + std::to_string(n),
                        std::numeric_limits<double>::infinity());
  }

  const Eigen::Matrix<Scalar, 1, 2> mean = points.colwise().mean();
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 2> centered = points.rowwise() - mean;
  Scalar scale = centered.cwiseAbs().maxCoeff();
  if (!(scale > Scalar(0))) scale = Scalar(1);
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 2> p = centered / scale;

  Eigen::Matrix<Scalar, Eigen::Dynamic, 3> a(n, 3);
  a.col(0) = p.col(0);
  a.col(1) = p.col(1);
  a.col(2).setOnes();
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> b = -p.rowwise().squaredNorm();

  const Mat3 normal = a.transpose() * a;
  const Vec3 rhs = a.transpose() * b;

  Eigen::JacobiSVD<Mat3> svd(normal, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double condition = sv(2) > Scalar(0) ? double(sv(0) / sv(2))
                                             : std::numeric_limits<double>::infinity();
  if (!(condition < kMaxCircleCondition)) {
    std::ostringstream msg;
    msg << "lms_circle_fit: singular normal equations (collinear points), condition " << condition;
    throw DegenerateFit(msg.str(), condition);
  }
  const Vec3 def = svd.solve(rhs);

  const Scalar ux = -def(0) / Scalar(2);
  const Scalar uy = -def(1) / Scalar(2);
  const Scalar r2 = ux * ux + uy * uy - def(2);
  if (!(r2 > Scalar(0))) {
    throw DegenerateFit("lms_circle_fit: fitted circle has non-positive squared radius", condition);
  }
  const Scalar r = std::sqrt(r2) * scale;
  return Ellipse<Scalar>::circle(ux * scale + mean(0), uy * scale + mean(1), r);
}

/// Circle Hough transform over integer centers and radii in `range`.
/// Each edge pixel votes once for every center at rounded distance r; votes
/// are divided by 2*pi*r. Ties go to the smaller radius, then the first
/// center in row-major order. Throws NoCircle when the best normalized vote
/// is below `min_support`.
EllipseFit hough_circle_fit(const BinaryMask& edges, RadiusRange range, int center_stride = 1,
                            double min_support = 0.2);

/// Vertical over horizontal pixel extent of the region.
double openness_ratio(const BinaryMask& iris_disk);

/// Full per-frame pipeline: boundaries by erosion, pupil by mass center,
/// iris by LMS on the lid-suppressed contour, Hough refit when the eye is
/// partially closed.
FrameMeasurement mixed_fit(const LabelMask& mask, const LocalizationConfig& cfg = {});

}  // namespace irisloc
