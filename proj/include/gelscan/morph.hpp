#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gelscan/image.hpp"

namespace gelscan {

/// Flat, origin-centred structuring element.
class StructuringElement {
 public:
  enum class Shape { Disk, Square };

  /// Offsets (dx, dy) with dx^2 + dy^2 <= radius^2. radius >= 0.
  static StructuringElement disk(int radius);
  /// side x side block, side odd and >= 1.
  static StructuringElement square(int side);

  Shape shape() const noexcept { return shape_; }
  /// Radius for disks, side length for squares.
  int size() const noexcept { return size_; }
  int reach() const noexcept { return reach_; }

  /// Horizontal run covered at row offset dy: dx in [-half_width, half_width].
  struct Run {
    int dy;
    int half_width;
  };
  const std::vector<Run>& runs() const noexcept { return runs_; }

  std::vector<std::pair<int, int>> offsets() const;

  /// "disk:10", "square:5".
  std::string to_string() const;
  /// Inverse of to_string; throws InvalidArgument.
  static StructuringElement parse(const std::string& text);

  friend bool operator==(const StructuringElement& a, const StructuringElement& b) noexcept {
    return a.shape_ == b.shape_ && a.size_ == b.size_;
  }

 private:
  StructuringElement(Shape shape, int size);

  Shape shape_;
  int size_;
  int reach_;
  std::vector<Run> runs_;
};

// Borders replicate the nearest edge pixel. For disk and square elements this
// is equivalent to dropping offsets that fall outside the frame.

GrayImage erode(const GrayImage& img, const StructuringElement& se);
GrayImage dilate(const GrayImage& img, const StructuringElement& se);
GrayImage open(const GrayImage& img, const StructuringElement& se);
GrayImage close(const GrayImage& img, const StructuringElement& se);

/// img - open(img); non-negative.
GrayImage top_hat(const GrayImage& img, const StructuringElement& se);
/// close(img) - img; non-negative.
GrayImage bottom_hat(const GrayImage& img, const StructuringElement& se);

/// window x window median with replicated borders. Throws BadWindow unless
/// window is odd and >= 3.
GrayImage median_filter(const GrayImage& img, int window);

}  // namespace gelscan
