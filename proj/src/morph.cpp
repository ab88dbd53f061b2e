#include "gelscan/morph.hpp"

#include <algorithm>
#include <map>

#include "gelscan/error.hpp"

namespace gelscan {

StructuringElement::StructuringElement(Shape shape, int size)
    : shape_(shape), size_(size), reach_(0) {
  if (shape == Shape::Disk) {
    if (size < 0) throw Error(ErrorCode::InvalidArgument, "disk radius must be >= 0");
    const long r2 = static_cast<long>(size) * size;
    for (int dy = -size; dy <= size; ++dy) {
      const long rem = r2 - static_cast<long>(dy) * dy;
      int w = 0;
      while (static_cast<long>(w + 1) * (w + 1) <= rem) ++w;
      runs_.push_back({dy, w});
    }
    reach_ = size;
  } else {
    if (size < 1 || size % 2 == 0) {
      throw Error(ErrorCode::InvalidArgument, "square side must be odd and >= 1");
    }
    const int h = (size - 1) / 2;
    for (int dy = -h; dy <= h; ++dy) runs_.push_back({dy, h});
    reach_ = h;
  }
}

StructuringElement StructuringElement::disk(int radius) {
  return StructuringElement(Shape::Disk, radius);
}

StructuringElement StructuringElement::square(int side) {
  return StructuringElement(Shape::Square, side);
}

std::vector<std::pair<int, int>> StructuringElement::offsets() const {
  std::vector<std::pair<int, int>> out;
  for (const auto& run : runs_) {
    for (int dx = -run.half_width; dx <= run.half_width; ++dx) out.emplace_back(dx, run.dy);
  }
  return out;
}

std::string StructuringElement::to_string() const {
  return (shape_ == Shape::Disk ? "disk:" : "square:") + std::to_string(size_);
}

StructuringElement StructuringElement::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "structuring element must look like disk:R or square:S");
  }
  const std::string kind = text.substr(0, colon);
  int size = 0;
  try {
    std::size_t used = 0;
    size = std::stoi(text.substr(colon + 1), &used);
    if (used != text.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, "bad structuring element size in '" + text + "'");
  }
  if (kind == "disk") return disk(size);
  if (kind == "square") return square(size);
  throw Error(ErrorCode::InvalidArgument, "unknown structuring element shape '" + kind + "'");
}

namespace {

struct MinOp {
  double operator()(double a, double b) const noexcept { return a < b ? a : b; }
};
struct MaxOp {
  double operator()(double a, double b) const noexcept { return a > b ? a : b; }
};

// out[x] = op over row[clamp(x - w) .. clamp(x + w)], van Herk / Gil-Werman
// on a copy of the row padded by replication.
template <class Op>
void sliding_row(std::span<const double> row, int w, std::vector<double>& padded,
                 std::vector<double>& prefix, std::vector<double>& suffix, double* out) {
  const int n = static_cast<int>(row.size());
  if (w == 0) {
    std::copy(row.begin(), row.end(), out);
    return;
  }
  const int k = 2 * w + 1;
  const int len = n + 2 * w;
  padded.resize(static_cast<std::size_t>(len));
  prefix.resize(padded.size());
  suffix.resize(padded.size());
  for (int i = 0; i < len; ++i) padded[i] = row[std::clamp(i - w, 0, n - 1)];
  Op op;
  for (int i = 0; i < len; ++i) {
    prefix[i] = (i % k == 0) ? padded[i] : op(prefix[i - 1], padded[i]);
  }
  for (int i = len - 1; i >= 0; --i) {
    suffix[i] = (i == len - 1 || (i + 1) % k == 0) ? padded[i] : op(suffix[i + 1], padded[i]);
  }
  // Window in padded coordinates is [x, x + k - 1].
  for (int x = 0; x < n; ++x) out[x] = op(suffix[x], prefix[x + k - 1]);
}

template <class Op>
GrayImage rank_extreme(const GrayImage& img, const StructuringElement& se) {
  const int width = img.width();
  const int height = img.height();
  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);

  // One horizontally filtered copy per distinct run half-width.
  std::map<int, std::vector<double>> by_width;
  for (const auto& run : se.runs()) by_width.try_emplace(run.half_width);
  std::vector<double> padded, prefix, suffix;
  for (auto& [w, buf] : by_width) {
    buf.resize(n);
    for (int y = 0; y < height; ++y) {
      sliding_row<Op>(img.row(y), w, padded, prefix, suffix,
                      buf.data() + static_cast<std::size_t>(y) * width);
    }
  }

  Op op;
  std::vector<double> out(n);
  for (int y = 0; y < height; ++y) {
    double* dst = out.data() + static_cast<std::size_t>(y) * width;
    bool first = true;
    for (const auto& run : se.runs()) {
      const int sy = std::clamp(y + run.dy, 0, height - 1);
      const double* src = by_width[run.half_width].data() + static_cast<std::size_t>(sy) * width;
      if (first) {
        std::copy(src, src + width, dst);
        first = false;
      } else {
        for (int x = 0; x < width; ++x) dst[x] = op(dst[x], src[x]);
      }
    }
  }
  return img.with_pixels(std::move(out));
}

GrayImage difference(const GrayImage& a, const GrayImage& b) {
  std::vector<double> out(a.size());
  auto pa = a.pixels();
  auto pb = b.pixels();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = pa[i] - pb[i];
  return a.with_pixels(std::move(out));
}

}  // namespace

GrayImage erode(const GrayImage& img, const StructuringElement& se) {
  return rank_extreme<MinOp>(img, se);
}

GrayImage dilate(const GrayImage& img, const StructuringElement& se) {
  return rank_extreme<MaxOp>(img, se);
}

GrayImage open(const GrayImage& img, const StructuringElement& se) {
  return dilate(erode(img, se), se);
}

GrayImage close(const GrayImage& img, const StructuringElement& se) {
  return erode(dilate(img, se), se);
}

GrayImage top_hat(const GrayImage& img, const StructuringElement& se) {
  return difference(img, open(img, se));
}

GrayImage bottom_hat(const GrayImage& img, const StructuringElement& se) {
  return difference(close(img, se), img);
}

GrayImage median_filter(const GrayImage& img, int window) {
  if (window < 3 || window % 2 == 0) {
    throw Error(ErrorCode::BadWindow,
                "median window must be odd and >= 3, got " + std::to_string(window));
  }
  const int h = window / 2;
  const int width = img.width();
  const int height = img.height();
  std::vector<double> out(img.size());
  std::vector<double> buf(static_cast<std::size_t>(window) * window);
  const auto mid = buf.begin() + static_cast<std::ptrdiff_t>(buf.size() / 2);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      std::size_t k = 0;
      for (int dy = -h; dy <= h; ++dy) {
        auto r = img.row(std::clamp(y + dy, 0, height - 1));
        for (int dx = -h; dx <= h; ++dx) buf[k++] = r[std::clamp(x + dx, 0, width - 1)];
      }
      std::nth_element(buf.begin(), mid, buf.end());
      out[static_cast<std::size_t>(y) * width + x] = *mid;
    }
  }
  return img.with_pixels(std::move(out));
}

}  // namespace gelscan
