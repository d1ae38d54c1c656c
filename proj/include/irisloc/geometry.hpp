#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace irisloc {

/// Axis-aligned ellipse: center (cx, cy) and semi-axes (rx, ry) in pixels.
/// x is the column, y the row, origin at the top-left pixel center.
/// A circle is the rx == ry case.
template <typename Scalar>
struct Ellipse {
  Scalar cx{0};
  Scalar cy{0};
  Scalar rx{0};
  Scalar ry{0};

  static Ellipse circle(Scalar cx, Scalar cy, Scalar r) { return {cx, cy, r, r}; }

  Eigen::Matrix<Scalar, 2, 1> center() const { return {cx, cy}; }
  Scalar mean_radius() const { return (rx + ry) / Scalar(2); }

  bool valid() const {
    return std::isfinite(cx) && std::isfinite(cy) && std::isfinite(rx) &&
           std::isfinite(ry) && rx >= Scalar(0) && ry >= Scalar(0);
  }

  /// True when the pixel center (x, y) lies inside or on the ellipse.
  bool contains(Scalar x, Scalar y) const {
    if (rx <= Scalar(0) || ry <= Scalar(0)) return false;
    const Scalar u = (x - cx) / rx;
    const Scalar v = (y - cy) / ry;
    return u * u + v * v <= Scalar(1);
  }

  template <typename NewScalar>
  Ellipse<NewScalar> cast() const {
    return {NewScalar(cx), NewScalar(cy), NewScalar(rx), NewScalar(ry)};
  }

  friend bool operator==(const Ellipse&, const Ellipse&) = default;
};

using EllipseFit = Ellipse<double>;

/// Half-open pixel box [x0, x1) x [y0, y1).
struct BoundingBox {
  std::int64_t x0{0};
  std::int64_t y0{0};
  std::int64_t x1{0};
  std::int64_t y1{0};

  std::int64_t width() const { return std::max<std::int64_t>(0, x1 - x0); }
  std::int64_t height() const { return std::max<std::int64_t>(0, y1 - y0); }
  std::int64_t area() const { return width() * height(); }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

enum class Method { MassCenter, LMS, Hough, Mixed };

std::string_view to_string(Method m);
Method method_from_string(std::string_view s);

/// One frame's localization result.
struct FrameMeasurement {
  std::int64_t frame_idx{0};
  double t{0.0};
  EllipseFit pupil;
  EllipseFit iris;
  double ratio{0.0};
  double openness{0.0};
  Method method{Method::Mixed};
  /// Set when the pupil came out larger than the iris; the frame is kept.
  bool inverted_geometry{false};
};

/// pupil mean radius / iris mean radius, or 0 when the iris radius is 0.
inline double pupil_iris_ratio(const EllipseFit& pupil, const EllipseFit& iris) {
  const double ri = iris.mean_radius();
  return ri > 0.0 ? pupil.mean_radius() / ri : 0.0;
}

}  // namespace irisloc
