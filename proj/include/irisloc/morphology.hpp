#pragma once

#include <irisloc/mask.hpp>

namespace irisloc {

/// 3x3 square erosion; pixels outside the image count as false.
BinaryMask erode(const BinaryMask& m);

/// 3x3 square dilation; pixels outside the image count as false.
BinaryMask dilate(const BinaryMask& m);

/// Sets every false region that is not 4-connected to the image border.
BinaryMask fill_holes(const BinaryMask& m);

/// One-pixel inner boundary: m XOR erode(m).
BinaryMask contour(const BinaryMask& m);

/// Keeps the 8-connected component with the most pixels. On a tie the
/// component reached first in row-major order wins. Empty in, empty out.
BinaryMask largest_component(const BinaryMask& m);

/// 8-connected component labels (0 = background, 1.. in row-major discovery
/// order) and the pixel count of each label.
struct ComponentLabels {
  Eigen::Array<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> labels;
  std::vector<std::int64_t> sizes;  // sizes[0] unused
};
ComponentLabels label_components(const BinaryMask& m);

/// Sobel gradients of a 0/1 image with zero padding.
struct SobelResponse {
  Eigen::ArrayXXi gx;  // rows = y
  Eigen::ArrayXXi gy;
};
SobelResponse sobel(const BinaryMask& m);

/// Drops contour pixels whose Sobel response on `source` is horizontally
/// oriented: |Gy| > horiz_ratio * |Gx|. Removes eyelid chords and lashes.
BinaryMask suppress_horizontal_edges(const BinaryMask& contour_mask, const BinaryMask& source,
                                     double horiz_ratio = 2.0);

}  // namespace irisloc
