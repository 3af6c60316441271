#pragma once

// Pixel grids, PGM I/O, thresholding and padding.
//
// Pixels are addressed as (x, y) with x the column and y the row, top row
// first. Vectorization is row-major: index = y * width + x. Inside the
// library a value of 1 means foreground (black bar code ink) and 0 means
// background. PGM files use the opposite convention, so callers that load
// scans go through load_scan()/save_scan(), which invert on the way in and
// out. read_pgm()/write_pgm() themselves never invert.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bcr {

class PgmError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Real-valued image on a uniform grid of spacing h.
class GridImage {
public:
  GridImage() = default;

  GridImage(std::size_t width, std::size_t height, double fill = 0.0,
            double spacing = 1.0)
      : GridImage(width, height, std::vector<double>(width * height, fill),
                  spacing) {}

  GridImage(std::size_t width, std::size_t height, std::vector<double> values,
            double spacing = 1.0)
      : width_(width), height_(height), spacing_(spacing),
        values_(std::move(values)) {
    if (width_ < 1 || height_ < 1)
      throw std::invalid_argument("GridImage: width and height must be >= 1");
    if (!(spacing_ > 0.0))
      throw std::invalid_argument("GridImage: spacing must be > 0");
    if (values_.size() != width_ * height_)
      throw std::invalid_argument("GridImage: values size != width*height");
  }

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t size() const { return values_.size(); }
  double spacing() const { return spacing_; }

  double operator()(std::size_t x, std::size_t y) const {
    return values_[y * width_ + x];
  }
  double &operator()(std::size_t x, std::size_t y) {
    return values_[y * width_ + x];
  }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  bool same_shape(const GridImage &other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const GridImage &, const GridImage &) = default;

private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  double spacing_ = 1.0;
  std::vector<double> values_;
};

/// Image whose entries are exactly 0 or 1.
class BinaryImage {
public:
  BinaryImage() = default;

  BinaryImage(std::size_t width, std::size_t height)
      : width_(width), height_(height), bits_(width * height, 0) {
    if (width_ < 1 || height_ < 1)
      throw std::invalid_argument("BinaryImage: width and height must be >= 1");
  }

  BinaryImage(std::size_t width, std::size_t height,
              std::vector<std::uint8_t> bits)
      : width_(width), height_(height), bits_(std::move(bits)) {
    if (width_ < 1 || height_ < 1)
      throw std::invalid_argument("BinaryImage: width and height must be >= 1");
    if (bits_.size() != width_ * height_)
      throw std::invalid_argument("BinaryImage: bits size != width*height");
    for (auto b : bits_)
      if (b > 1)
        throw std::invalid_argument("BinaryImage: entries must be 0 or 1");
  }

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t size() const { return bits_.size(); }

  std::uint8_t operator()(std::size_t x, std::size_t y) const {
    return bits_[y * width_ + x];
  }
  void set(std::size_t x, std::size_t y, bool on) {
    bits_[y * width_ + x] = on ? 1 : 0;
  }

  std::span<const std::uint8_t> bits() const { return bits_; }

  std::size_t count_ones() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
  }

  bool same_shape(const BinaryImage &other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  GridImage to_grid(double spacing = 1.0) const {
    std::vector<double> v(bits_.begin(), bits_.end());
    return GridImage(width_, height_, std::move(v), spacing);
  }

  friend bool operator==(const BinaryImage &, const BinaryImage &) = default;

private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::uint8_t> bits_;
};

namespace detail {

class PgmCursor {
public:
  explicit PgmCursor(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void skip_whitespace_and_comments() {
    while (pos_ < bytes_.size()) {
      const auto c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n')
          ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  unsigned long read_uint(const char *what) {
    skip_whitespace_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_]))
      throw PgmError(std::string("PGM: expected ") + what);
    unsigned long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > 0xFFFFFFFFul)
        throw PgmError(std::string("PGM: ") + what + " out of range");
      ++pos_;
    }
    return v;
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::uint8_t at(std::size_t i) const { return bytes_[pos_ + i]; }
  bool at_end() const { return pos_ >= bytes_.size(); }
  std::uint8_t peek() const { return bytes_[pos_]; }

private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

} // namespace detail

/// Parse a P2 (ASCII) or P5 (binary) PGM. Values are divided by maxval.
inline GridImage read_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P')
    throw PgmError("PGM: missing magic number");
  const bool ascii = bytes[1] == '2';
  if (!ascii && bytes[1] != '5')
    throw PgmError(std::string("PGM: unsupported magic number P") +
                   static_cast<char>(bytes[1]));

  detail::PgmCursor cur(bytes);
  cur.advance(2);
  if (cur.at_end() || !std::isspace(cur.peek()))
    throw PgmError("PGM: malformed header after magic number");

  const auto width = cur.read_uint("width");
  const auto height = cur.read_uint("height");
  const auto maxval = cur.read_uint("maxval");
  if (width < 1 || height < 1)
    throw PgmError("PGM: zero image dimension");
  if (maxval < 1 || maxval > 65535)
    throw PgmError("PGM: maxval must be in [1, 65535]");

  const std::size_t count = static_cast<std::size_t>(width) * height;
  std::vector<double> values(count);
  const double scale = static_cast<double>(maxval);

  if (ascii) {
    for (std::size_t i = 0; i < count; ++i) {
      unsigned long v;
      try {
        v = cur.read_uint("pixel value");
      } catch (const PgmError &) {
        throw PgmError("PGM: truncated pixel data");
      }
      if (v > maxval)
        throw PgmError("PGM: pixel value exceeds maxval");
      values[i] = v / scale;
    }
  } else {
    // Exactly one whitespace byte separates maxval from the raster.
    if (cur.at_end() || !std::isspace(cur.peek()))
      throw PgmError("PGM: malformed header before raster");
    cur.advance(1);
    const std::size_t bpp = maxval > 255 ? 2 : 1;
    if (cur.remaining() < count * bpp)
      throw PgmError("PGM: truncated pixel data");
    for (std::size_t i = 0; i < count; ++i) {
      unsigned v = bpp == 1 ? cur.at(i)
                            : (static_cast<unsigned>(cur.at(2 * i)) << 8) |
                                  cur.at(2 * i + 1);
      if (v > maxval)
        throw PgmError("PGM: pixel value exceeds maxval");
      values[i] = v / scale;
    }
  }
  return GridImage(width, height, std::move(values));
}

inline GridImage read_pgm(std::string_view bytes) {
  return read_pgm(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t *>(bytes.data()), bytes.size()));
}

/// Encode as P5. Values are clamped to [0,1] and rounded half away from zero.
inline std::vector<std::uint8_t> write_pgm(const GridImage &img,
                                           unsigned maxval = 255) {
  if (maxval != 255 && maxval != 65535)
    throw std::invalid_argument("write_pgm: maxval must be 255 or 65535");
  std::ostringstream header;
  header << "P5\n" << img.width() << ' ' << img.height() << '\n' << maxval << '\n';
  const std::string h = header.str();
  std::vector<std::uint8_t> out(h.begin(), h.end());
  out.reserve(h.size() + img.size() * (maxval > 255 ? 2 : 1));
  for (double v : img.values()) {
    const double c = std::clamp(std::isnan(v) ? 0.0 : v, 0.0, 1.0);
    const auto q = static_cast<unsigned>(std::lround(c * maxval));
    if (maxval > 255) {
      out.push_back(static_cast<std::uint8_t>(q >> 8));
      out.push_back(static_cast<std::uint8_t>(q & 0xFF));
    } else {
      out.push_back(static_cast<std::uint8_t>(q));
    }
  }
  return out;
}

/// 1 where value >= t.
inline BinaryImage threshold(const GridImage &img, double t) {
  if (!(t > 0.0 && t < 1.0))
    throw std::invalid_argument("threshold: t must lie in (0,1)");
  std::vector<std::uint8_t> bits(img.size());
  std::transform(img.values().begin(), img.values().end(), bits.begin(),
                 [t](double v) { return v >= t ? 1 : 0; });
  return BinaryImage(img.width(), img.height(), std::move(bits));
}

inline GridImage pad(const GridImage &img, std::size_t margin, double value) {
  GridImage out(img.width() + 2 * margin, img.height() + 2 * margin, value,
                img.spacing());
  for (std::size_t y = 0; y < img.height(); ++y)
    for (std::size_t x = 0; x < img.width(); ++x)
      out(x + margin, y + margin) = img(x, y);
  return out;
}

inline GridImage crop(const GridImage &img, std::size_t x0, std::size_t y0,
                      std::size_t width, std::size_t height) {
  if (x0 + width > img.width() || y0 + height > img.height())
    throw std::invalid_argument("crop: window exceeds image");
  GridImage out(width, height, 0.0, img.spacing());
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x)
      out(x, y) = img(x0 + x, y0 + y);
  return out;
}

/// 1 - v pixelwise; maps between PGM brightness and foreground density.
inline GridImage invert(const GridImage &img) {
  GridImage out = img;
  for (double &v : out.values())
    v = 1.0 - v;
  return out;
}

inline GridImage transpose(const GridImage &img) {
  GridImage out(img.height(), img.width(), 0.0, img.spacing());
  for (std::size_t y = 0; y < img.height(); ++y)
    for (std::size_t x = 0; x < img.width(); ++x)
      out(y, x) = img(x, y);
  return out;
}

inline BinaryImage transpose(const BinaryImage &img) {
  BinaryImage out(img.height(), img.width());
  for (std::size_t y = 0; y < img.height(); ++y)
    for (std::size_t x = 0; x < img.width(); ++x)
      out.set(y, x, img(x, y));
  return out;
}

inline double max_abs_difference(const GridImage &a, const GridImage &b) {
  if (!a.same_shape(b))
    throw std::invalid_argument("max_abs_difference: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::string &path,
                             std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write " + path);
  out.write(reinterpret_cast<const char *>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out)
    throw std::runtime_error("write failed: " + path);
}

/// Load a PGM scan as foreground density (black ink = 1).
inline GridImage load_scan(const std::string &path) {
  return invert(read_pgm(read_file_bytes(path)));
}

inline void save_scan(const std::string &path, const GridImage &img,
                      unsigned maxval = 255) {
  write_file_bytes(path, write_pgm(invert(img), maxval));
}

} // namespace bcr
