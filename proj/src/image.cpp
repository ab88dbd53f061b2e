#include "gelscan/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gelscan/error.hpp"

namespace gelscan {

GrayImage::GrayImage(int width, int height, std::vector<double> pixels, int bit_depth)
    : width_(width), height_(height), bit_depth_(bit_depth), pixels_(std::move(pixels)) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::InvalidArgument,
                "image dimensions must be positive, got " + std::to_string(width) + "x" +
                    std::to_string(height));
  }
  if (bit_depth != 8 && bit_depth != 16) {
    throw Error(ErrorCode::InvalidArgument,
                "bit depth must be 8 or 16, got " + std::to_string(bit_depth));
  }
  if (pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::InvalidArgument, "pixel count does not match dimensions");
  }
  const double top = max_range();
  for (double v : pixels_) {
    // NaN fails both comparisons, hence the negated form.
    if (!(v >= 0.0 && v <= top)) {
      throw Error(ErrorCode::InvalidArgument,
                  "pixel value " + std::to_string(v) + " outside [0, " +
                      std::to_string(static_cast<int>(top)) + "]");
    }
  }
}

GrayImage GrayImage::filled(int width, int height, double value, int bit_depth) {
  const auto n = static_cast<std::size_t>(std::max(width, 0)) *
                 static_cast<std::size_t>(std::max(height, 0));
  return GrayImage(width, height, std::vector<double>(n, value), bit_depth);
}

GrayImage GrayImage::with_pixels(std::vector<double> pixels) const {
  return GrayImage(width_, height_, std::move(pixels), bit_depth_);
}

GrayImage GrayImage::crop(int x, int y, int w, int h) const {
  if (x < 0 || y < 0 || w < 1 || h < 1 || x + w > width_ || y + h > height_) {
    throw Error(ErrorCode::InvalidArgument, "crop rectangle leaves the image");
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  for (int r = y; r < y + h; ++r) {
    auto src = row(r).subspan(static_cast<std::size_t>(x), static_cast<std::size_t>(w));
    out.insert(out.end(), src.begin(), src.end());
  }
  return GrayImage(w, h, std::move(out), bit_depth_);
}

Extrema min_max(const GrayImage& img) noexcept {
  auto [lo, hi] = std::minmax_element(img.pixels().begin(), img.pixels().end());
  return {*lo, *hi};
}

}  // namespace gelscan
