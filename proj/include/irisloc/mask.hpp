#pragma once

#include <irisloc/errors.hpp>

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace irisloc {

enum class Label : std::uint8_t { Background = 0, Sclera = 1, Iris = 2, Pupil = 3 };

inline constexpr std::array<Label, 4> kAllLabels{Label::Background, Label::Sclera,
                                                 Label::Iris, Label::Pupil};

using LabelGrid = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using BitGrid = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Integer pixel coordinates of true pixels, one (x, y) row per pixel.
using PixelList = Eigen::Matrix<double, Eigen::Dynamic, 2>;

/// Per-pixel class image. Rows are y, columns are x.
class LabelMask {
 public:
  LabelMask(int width, int height, Label fill = Label::Background);
  /// Throws InvalidArgument on empty grids or values outside the four classes.
  explicit LabelMask(LabelGrid labels);

  int width() const { return static_cast<int>(labels_.cols()); }
  int height() const { return static_cast<int>(labels_.rows()); }

  Label at(int x, int y) const { return static_cast<Label>(labels_(y, x)); }
  void set(int x, int y, Label l) { labels_(y, x) = static_cast<std::uint8_t>(l); }

  const LabelGrid& grid() const { return labels_; }

  friend bool operator==(const LabelMask& a, const LabelMask& b) {
    return a.labels_.rows() == b.labels_.rows() && a.labels_.cols() == b.labels_.cols() &&
           (a.labels_ == b.labels_).all();
  }

 private:
  LabelGrid labels_;
};

/// Single-class bitmap. Rows are y, columns are x.
class BinaryMask {
 public:
  BinaryMask(int width, int height, bool fill = false);
  explicit BinaryMask(BitGrid bits);

  int width() const { return static_cast<int>(bits_.cols()); }
  int height() const { return static_cast<int>(bits_.rows()); }

  bool at(int x, int y) const { return bits_(y, x); }
  /// Out-of-bounds reads return `outside`.
  bool get(int x, int y, bool outside = false) const {
    if (x < 0 || y < 0 || x >= width() || y >= height()) return outside;
    return bits_(y, x);
  }
  void set(int x, int y, bool v = true) { bits_(y, x) = v; }

  const BitGrid& bits() const { return bits_; }
  BitGrid& bits() { return bits_; }

  std::int64_t popcount() const { return bits_.count(); }
  bool empty() const { return !bits_.any(); }
  bool same_shape(const BinaryMask& o) const {
    return width() == o.width() && height() == o.height();
  }
  bool subset_of(const BinaryMask& o) const;

  /// Coordinates of every true pixel in row-major order.
  PixelList pixels() const;

  BinaryMask operator~() const;
  BinaryMask& operator&=(const BinaryMask& o);
  BinaryMask& operator|=(const BinaryMask& o);
  BinaryMask& operator^=(const BinaryMask& o);

  friend BinaryMask operator&(BinaryMask a, const BinaryMask& b) { return a &= b; }
  friend BinaryMask operator|(BinaryMask a, const BinaryMask& b) { return a |= b; }
  friend BinaryMask operator^(BinaryMask a, const BinaryMask& b) { return a ^= b; }

  friend bool operator==(const BinaryMask& a, const BinaryMask& b) {
    return a.same_shape(b) && (a.bits_ == b.bits_).all();
  }

 private:
  BitGrid bits_;
};

/// Gray level used for a class in PGM files: 0, 85, 170, 255.
constexpr std::uint8_t gray_of(Label l) { return static_cast<std::uint8_t>(85 * static_cast<int>(l)); }

/// Parse a binary PGM (P5, maxval 255) whose gray values are class codes.
/// Throws CodecError naming the problem and, for bad pixels, the value and offset.
LabelMask decode_mask(std::span<const std::uint8_t> bytes);
LabelMask decode_mask(const std::string& bytes);

/// Serialize as binary PGM; decode_mask(encode_mask(m)) == m.
std::vector<std::uint8_t> encode_mask(const LabelMask& mask);

/// Bit true where the pixel carries `label`.
BinaryMask class_plane(const LabelMask& mask, Label label);

LabelMask read_mask_file(const std::string& path);
void write_mask_file(const std::string& path, const LabelMask& mask);

}  // namespace irisloc
