#include <irisloc/morphology.hpp>

#include <cmath>
#include <vector>

namespace irisloc {

namespace {

// Separable 3-wide AND (erode) or OR (dilate) with a false border.
template <bool IsErode>
BitGrid box3(const BitGrid& in) {
  const Eigen::Index h = in.rows();
  const Eigen::Index w = in.cols();
  BitGrid horiz(h, w);
  for (Eigen::Index y = 0; y < h; ++y) {
    for (Eigen::Index x = 0; x < w; ++x) {
      const bool l = x > 0 && in(y, x - 1);
      const bool r = x + 1 < w && in(y, x + 1);
      horiz(y, x) = IsErode ? (l && in(y, x) && r) : (l || in(y, x) || r);
    }
  }
  BitGrid out(h, w);
  for (Eigen::Index y = 0; y < h; ++y) {
    for (Eigen::Index x = 0; x < w; ++x) {
      const bool u = y > 0 && horiz(y - 1, x);
      const bool d = y + 1 < h && horiz(y + 1, x);
      out(y, x) = IsErode ? (u && horiz(y, x) && d) : (u || horiz(y, x) || d);
    }
  }
  return out;
}

}  // namespace

BinaryMask erode(const BinaryMask& m) { return BinaryMask(box3<true>(m.bits())); }

BinaryMask dilate(const BinaryMask& m) { return BinaryMask(box3<false>(m.bits())); }

BinaryMask fill_holes(const BinaryMask& m) {
  const int w = m.width();
  const int h = m.height();
  BitGrid outside = BitGrid::Constant(h, w, false);
  std::vector<std::pair<int, int>> stack;
  auto seed = [&](int x, int y) {
    if (!m.at(x, y) && !outside(y, x)) {
      outside(y, x) = true;
      stack.emplace_back(x, y);
    }
  };
  for (int x = 0; x < w; ++x) {
    seed(x, 0);
    seed(x, h - 1);
  }
  for (int y = 0; y < h; ++y) {
    seed(0, y);
    seed(w - 1, y);
  }
  while (!stack.empty()) {
    const auto [x, y] = stack.back();
    stack.pop_back();
    if (x > 0) seed(x - 1, y);
    if (x + 1 < w) seed(x + 1, y);
    if (y > 0) seed(x, y - 1);
    if (y + 1 < h) seed(x, y + 1);
  }
  return BinaryMask(BitGrid(!outside));
}

BinaryMask contour(const BinaryMask& m) { return m ^ erode(m); }

ComponentLabels label_components(const BinaryMask& m) {
  const int w = m.width();
  const int h = m.height();
  ComponentLabels out;
  out.labels.setZero(h, w);
  out.sizes.push_back(0);
  std::vector<std::pair<int, int>> stack;
  for (int y0 = 0; y0 < h; ++y0) {
    for (int x0 = 0; x0 < w; ++x0) {
      if (!m.at(x0, y0) || out.labels(y0, x0) != 0) continue;
      const int id = static_cast<int>(out.sizes.size());
      std::int64_t count = 0;
      out.labels(y0, x0) = id;
      stack.emplace_back(x0, y0);
      while (!stack.empty()) {
        const auto [x, y] = stack.back();
        stack.pop_back();
        ++count;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx;
            const int ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            if (m.at(nx, ny) && out.labels(ny, nx) == 0) {
              out.labels(ny, nx) = id;
              stack.emplace_back(nx, ny);
            }
          }
        }
      }
      out.sizes.push_back(count);
    }
  }
  return out;
}

BinaryMask largest_component(const BinaryMask& m) {
  const auto comps = label_components(m);
  int best = 0;
  for (int id = 1; id < static_cast<int>(comps.sizes.size()); ++id) {
    if (best == 0 || comps.sizes[id] > comps.sizes[best]) best = id;
  }
  if (best == 0) return BinaryMask(m.width(), m.height());
  return BinaryMask(BitGrid(comps.labels == best));
}

SobelResponse sobel(const BinaryMask& m) {
  const int w = m.width();
  const int h = m.height();
  SobelResponse s;
  s.gx.setZero(h, w);
  s.gy.setZero(h, w);
  auto v = [&](int x, int y) { return m.get(x, y) ? 1 : 0; };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      s.gx(y, x) = (v(x + 1, y - 1) + 2 * v(x + 1, y) + v(x + 1, y + 1)) -
                   (v(x - 1, y - 1) + 2 * v(x - 1, y) + v(x - 1, y + 1));
      s.gy(y, x) = (v(x - 1, y + 1) + 2 * v(x, y + 1) + v(x + 1, y + 1)) -
                   (v(x - 1, y - 1) + 2 * v(x, y - 1) + v(x + 1, y - 1));
    }
  }
  return s;
}

BinaryMask suppress_horizontal_edges(const BinaryMask& contour_mask, const BinaryMask& source,
                                     double horiz_ratio) {
  if (!contour_mask.same_shape(source)) {
    throw DimensionMismatch("suppress_horizontal_edges: contour and source dimensions differ");
  }
  const auto s = sobel(source);
  BinaryMask out = contour_mask;
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      if (!out.at(x, y)) continue;
      if (std::abs(s.gy(y, x)) > horiz_ratio * std::abs(s.gx(y, x))) out.set(x, y, false);
    }
  }
  return out;
}

}  // namespace irisloc
