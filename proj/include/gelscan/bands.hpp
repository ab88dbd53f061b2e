#pragma once

#include <cstdint>
#include <vector>

#include "gelscan/image.hpp"

namespace gelscan {

/// Foreground mask of candidate band pixels.
struct BandMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;  // 1 = foreground

  bool at(int x, int y) const noexcept {
    return bits[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                static_cast<std::size_t>(x)] != 0;
  }
  std::size_t count() const noexcept;
};

enum class Connectivity { Four = 4, Eight = 8 };

/// Component labels: 0 is background, components are 1..count.
struct LabelMap {
  int width = 0;
  int height = 0;
  std::vector<std::int32_t> labels;
  std::int32_t count = 0;

  std::int32_t at(int x, int y) const noexcept {
    return labels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(x)];
  }
};

struct BoundingBox {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// A detected band: a connected component of the filtered image.
struct Band {
  std::int32_t label = 0;
  std::int64_t area = 0;       // pixel count
  double centroid_x = 0.0;     // intensity-weighted
  double centroid_y = 0.0;
  BoundingBox bbox;
  double mean_intensity = 0.0;
  double total_intensity = 0.0;

  friend bool operator==(const Band&, const Band&) = default;
};

/// bits(p) = img(p) > epsilon.
BandMask binarize(const GrayImage& img, double epsilon);

/// Two-pass union-find labelling. Labels follow the raster order of each
/// component's first pixel.
LabelMap connected_components(const BandMask& mask, Connectivity connectivity);

/// One Band per component with area >= min_area, sorted by label. Centroids
/// weight each pixel by its intensity; a component whose intensities sum to
/// zero falls back to the geometric centroid. Throws InvalidArgument on a
/// geometry mismatch.
std::vector<Band> measure_bands(const LabelMap& labels, const GrayImage& img,
                                std::int64_t min_area);

}  // namespace gelscan
