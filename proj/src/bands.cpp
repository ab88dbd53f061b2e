#include "gelscan/bands.hpp"

#include <algorithm>
#include <numeric>

#include "gelscan/error.hpp"

namespace gelscan {

std::size_t BandMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

BandMask binarize(const GrayImage& img, double epsilon) {
  BandMask mask{img.width(), img.height(), std::vector<std::uint8_t>(img.size(), 0)};
  auto px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) mask.bits[i] = px[i] > epsilon ? 1 : 0;
  return mask;
}

namespace {

class DisjointSet {
 public:
  std::int32_t make() {
    parent_.push_back(static_cast<std::int32_t>(parent_.size()));
    return parent_.back();
  }
  std::int32_t find(std::int32_t a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }
  void unite(std::int32_t a, std::int32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    // Smaller index becomes the root; keeps the structure deterministic.
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::int32_t> parent_;
};

}  // namespace

LabelMap connected_components(const BandMask& mask, Connectivity connectivity) {
  const int w = mask.width;
  const int h = mask.height;
  LabelMap out{w, h, std::vector<std::int32_t>(mask.bits.size(), 0), 0};
  DisjointSet sets;
  sets.make();  // index 0 reserved for background

  const bool eight = connectivity == Connectivity::Eight;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y)) continue;
      std::int32_t neighbours[4];
      int k = 0;
      auto look = [&](int nx, int ny) {
        if (nx < 0 || ny < 0 || nx >= w) return;
        const std::int32_t l = out.at(nx, ny);
        if (l != 0) neighbours[k++] = l;
      };
      look(x - 1, y);
      look(x, y - 1);
      if (eight) {
        look(x - 1, y - 1);
        look(x + 1, y - 1);
      }
      std::int32_t label;
      if (k == 0) {
        label = sets.make();
      } else {
        label = *std::min_element(neighbours, neighbours + k);
        for (int i = 0; i < k; ++i) sets.unite(label, neighbours[i]);
      }
      out.labels[static_cast<std::size_t>(y) * w + x] = label;
    }
  }

  // Final ids in order of first appearance in the raster scan.
  std::vector<std::int32_t> final_id;
  std::int32_t next = 0;
  for (auto& l : out.labels) {
    if (l == 0) continue;
    const std::int32_t root = sets.find(l);
    if (static_cast<std::size_t>(root) >= final_id.size()) final_id.resize(root + 1, 0);
    if (final_id[root] == 0) final_id[root] = ++next;
    l = final_id[root];
  }
  out.count = next;
  return out;
}

std::vector<Band> measure_bands(const LabelMap& labels, const GrayImage& img,
                                std::int64_t min_area) {
  if (labels.width != img.width() || labels.height != img.height()) {
    throw Error(ErrorCode::InvalidArgument, "label map and image dimensions differ");
  }
  struct Accum {
    std::int64_t area = 0;
    double sum_v = 0.0, sum_vx = 0.0, sum_vy = 0.0;
    double sum_x = 0.0, sum_y = 0.0;
    BoundingBox box{0, 0, -1, -1};
  };
  std::vector<Accum> acc(static_cast<std::size_t>(labels.count) + 1);
  for (int y = 0; y < labels.height; ++y) {
    auto r = img.row(y);
    for (int x = 0; x < labels.width; ++x) {
      const std::int32_t l = labels.at(x, y);
      if (l == 0) continue;
      Accum& a = acc[static_cast<std::size_t>(l)];
      const double v = r[x];
      if (a.area == 0) {
        a.box = {x, y, x, y};
      } else {
        a.box.x_min = std::min(a.box.x_min, x);
        a.box.x_max = std::max(a.box.x_max, x);
        a.box.y_max = std::max(a.box.y_max, y);
      }
      ++a.area;
      a.sum_v += v;
      a.sum_vx += v * x;
      a.sum_vy += v * y;
      a.sum_x += x;
      a.sum_y += y;
    }
  }

  std::vector<Band> bands;
  for (std::int32_t l = 1; l <= labels.count; ++l) {
    const Accum& a = acc[static_cast<std::size_t>(l)];
    if (a.area == 0 || a.area < min_area) continue;
    Band b;
    b.label = l;
    b.area = a.area;
    b.bbox = a.box;
    b.total_intensity = a.sum_v;
    b.mean_intensity = a.sum_v / static_cast<double>(a.area);
    if (a.sum_v > 0.0) {
      b.centroid_x = a.sum_vx / a.sum_v;
      b.centroid_y = a.sum_vy / a.sum_v;
    } else {
      b.centroid_x = a.sum_x / static_cast<double>(a.area);
      b.centroid_y = a.sum_y / static_cast<double>(a.area);
    }
    bands.push_back(b);
  }
  return bands;
}

}  // namespace gelscan
