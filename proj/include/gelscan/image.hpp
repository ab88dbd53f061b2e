#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace gelscan {

/// Grayscale intensity matrix shared by every pipeline stage.
///
/// Pixels are stored row-major as non-negative reals so that intermediate
/// stages keep full precision; quantization only happens when an image is
/// written to disk. Addressing is (x, y) = (column, row). Instances are
/// immutable once constructed.
class GrayImage {
 public:
  /// Throws InvalidArgument unless width, height >= 1, the pixel count
  /// matches, bit_depth is 8 or 16 and every value lies in [0, max_range].
  GrayImage(int width, int height, std::vector<double> pixels, int bit_depth = 8);

  /// Constant-valued image.
  static GrayImage filled(int width, int height, double value, int bit_depth = 8);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int bit_depth() const noexcept { return bit_depth_; }
  double max_range() const noexcept { return max_range_for(bit_depth_); }
  std::size_t size() const noexcept { return pixels_.size(); }

  double at(int x, int y) const noexcept {
    return pixels_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                   static_cast<std::size_t>(x)];
  }
  std::span<const double> pixels() const noexcept { return pixels_; }
  std::span<const double> row(int y) const noexcept {
    return std::span<const double>(pixels_).subspan(
        static_cast<std::size_t>(y) * static_cast<std::size_t>(width_),
        static_cast<std::size_t>(width_));
  }

  /// Same geometry and depth, new pixel values (validated).
  GrayImage with_pixels(std::vector<double> pixels) const;

  /// Sub-rectangle copy; throws InvalidArgument when it leaves the frame.
  GrayImage crop(int x, int y, int w, int h) const;

  static double max_range_for(int bit_depth) noexcept {
    return bit_depth == 16 ? 65535.0 : 255.0;
  }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  int width_;
  int height_;
  int bit_depth_;
  std::vector<double> pixels_;
};

struct Extrema {
  double min;
  double max;
};

Extrema min_max(const GrayImage& img) noexcept;

}  // namespace gelscan
