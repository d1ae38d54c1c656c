#include <irisloc/mask.hpp>

#include <cctype>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

namespace irisloc {

namespace {

// Largest accepted image, in pixels. Well above any sensor crop.
constexpr std::uint64_t kMaxPixels = std::uint64_t{1} << 28;

bool is_class_value(std::uint8_t v) { return v == 0 || v == 85 || v == 170 || v == 255; }

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const auto c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::uint64_t number(const char* what) {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      throw CodecError(std::string("malformed PGM header: expected ") + what);
    }
    std::uint64_t v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > kMaxPixels) throw CodecError(std::string("dimension overflow in ") + what);
      ++pos_;
    }
    return v;
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }
  std::size_t size() const { return bytes_.size(); }
  std::uint8_t peek() const { return bytes_[pos_]; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

LabelMask::LabelMask(int width, int height, Label fill) {
  if (width <= 0 || height <= 0) throw InvalidArgument("mask dimensions must be positive");
  labels_ = LabelGrid::Constant(height, width, static_cast<std::uint8_t>(fill));
}

LabelMask::LabelMask(LabelGrid labels) : labels_(std::move(labels)) {
  if (labels_.rows() <= 0 || labels_.cols() <= 0) {
    throw InvalidArgument("mask dimensions must be positive");
  }
  if ((labels_ > static_cast<std::uint8_t>(Label::Pupil)).any()) {
    throw InvalidArgument("label grid holds a value outside the four classes");
  }
}

BinaryMask::BinaryMask(int width, int height, bool fill) {
  if (width <= 0 || height <= 0) throw InvalidArgument("mask dimensions must be positive");
  bits_ = BitGrid::Constant(height, width, fill);
}

BinaryMask::BinaryMask(BitGrid bits) : bits_(std::move(bits)) {
  if (bits_.rows() <= 0 || bits_.cols() <= 0) {
    throw InvalidArgument("mask dimensions must be positive");
  }
}

bool BinaryMask::subset_of(const BinaryMask& o) const {
  if (!same_shape(o)) throw DimensionMismatch("subset_of: mask dimensions differ");
  return !(bits_ && !o.bits_).any();
}

PixelList BinaryMask::pixels() const {
  PixelList out(popcount(), 2);
  Eigen::Index k = 0;
  for (int y = 0; y < height(); ++y) {
    for (int x = 0; x < width(); ++x) {
      if (bits_(y, x)) {
        out(k, 0) = x;
        out(k, 1) = y;
        ++k;
      }
    }
  }
  return out;
}

BinaryMask BinaryMask::operator~() const { return BinaryMask(BitGrid(!bits_)); }

BinaryMask& BinaryMask::operator&=(const BinaryMask& o) {
  if (!same_shape(o)) throw DimensionMismatch("mask AND: dimensions differ");
  bits_ = bits_ && o.bits_;
  return *this;
}

BinaryMask& BinaryMask::operator|=(const BinaryMask& o) {
  if (!same_shape(o)) throw DimensionMismatch("mask OR: dimensions differ");
  bits_ = bits_ || o.bits_;
  return *this;
}

BinaryMask& BinaryMask::operator^=(const BinaryMask& o) {
  if (!same_shape(o)) throw DimensionMismatch("mask XOR: dimensions differ");
  bits_ = bits_ != o.bits_;
  return *this;
}

LabelMask decode_mask(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw CodecError("malformed PGM header: missing P5 magic");
  }
  HeaderReader r(bytes);
  r.advance(2);
  const auto width = r.number("width");
  const auto height = r.number("height");
  const auto maxval = r.number("maxval");
  if (width == 0 || height == 0) throw CodecError("malformed PGM header: zero dimension");
  if (width * height > kMaxPixels) throw CodecError("dimension overflow: image too large");
  if (maxval != 255) {
    throw CodecError("unsupported PGM maxval " + std::to_string(maxval) + " (expected 255)");
  }
  if (r.pos() >= r.size() || !std::isspace(r.peek())) {
    throw CodecError("malformed PGM header: missing separator before pixel data");
  }
  r.advance(1);

  const std::size_t n = static_cast<std::size_t>(width * height);
  const std::size_t start = r.pos();
  if (bytes.size() - start != n) {
    std::ostringstream msg;
    msg << "PGM payload holds " << (bytes.size() - start) << " bytes, expected " << n;
    throw CodecError(msg.str());
  }

  LabelGrid grid(static_cast<Eigen::Index>(height), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = bytes[start + i];
    if (!is_class_value(v)) {
      std::ostringstream msg;
      msg << "invalid label value " << int(v) << " at offset " << (start + i);
      throw CodecError(msg.str());
    }
    grid.data()[i] = static_cast<std::uint8_t>(v / 85);
  }
  return LabelMask(std::move(grid));
}

LabelMask decode_mask(const std::string& bytes) {
  return decode_mask(std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

std::vector<std::uint8_t> encode_mask(const LabelMask& mask) {
  const std::string header = "P5\n" + std::to_string(mask.width()) + " " +
                             std::to_string(mask.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  const auto& g = mask.grid();
  out.reserve(out.size() + static_cast<std::size_t>(g.size()));
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    out.push_back(gray_of(static_cast<Label>(g.data()[i])));
  }
  return out;
}

BinaryMask class_plane(const LabelMask& mask, Label label) {
  return BinaryMask(BitGrid(mask.grid() == static_cast<std::uint8_t>(label)));
}

LabelMask read_mask_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CodecError("cannot open mask file " + path);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_mask(bytes);
  } catch (const CodecError& e) {
    throw CodecError(path + ": " + e.what());
  }
}

void write_mask_file(const std::string& path, const LabelMask& mask) {
  const auto bytes = encode_mask(mask);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CodecError("cannot write mask file " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CodecError("failed writing mask file " + path);
}

}  // namespace irisloc
