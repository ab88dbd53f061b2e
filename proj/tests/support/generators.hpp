#pragma once

// Seeded generators for property tests.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "gelscan/bands.hpp"
#include "gelscan/image.hpp"

namespace gen {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : e_(seed) {}

  double uniform() { return static_cast<double>(e_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) { return lo + static_cast<int>(e_() % static_cast<std::uint64_t>(hi - lo + 1)); }
  bool chance(double p) { return uniform() < p; }

 private:
  std::mt19937_64 e_;
};

// Integer-valued pixels, optionally only a few distinct levels so ties and
// plateaus are common.
inline gelscan::GrayImage image(Rng& r, int w, int h, int bit_depth = 8, int levels = 0) {
  const double range = gelscan::GrayImage::max_range_for(bit_depth);
  std::vector<double> px(static_cast<std::size_t>(w) * h);
  for (double& v : px) {
    if (levels > 1) v = std::round(r.integer(0, levels - 1) * range / (levels - 1));
    else v = r.integer(0, static_cast<int>(range));
  }
  return gelscan::GrayImage(w, h, std::move(px), bit_depth);
}

// Non-integer pixel values.
inline gelscan::GrayImage real_image(Rng& r, int w, int h, double lo = 0.0, double hi = 255.0) {
  std::vector<double> px(static_cast<std::size_t>(w) * h);
  for (double& v : px) v = r.uniform(lo, hi);
  return gelscan::GrayImage(w, h, std::move(px));
}

inline gelscan::BandMask mask(Rng& r, int w, int h, double density) {
  gelscan::BandMask m{w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h)};
  for (auto& b : m.bits) b = r.chance(density) ? 1 : 0;
  return m;
}

// Profile with a handful of bumps over a noisy floor.
inline std::vector<double> profile(Rng& r, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  const int bumps = r.integer(1, 5);
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = r.uniform(0.0, 2.0);
  for (int b = 0; b < bumps; ++b) {
    const double c = r.uniform(0.0, n - 1.0), a = r.uniform(5.0, 40.0), s = r.uniform(1.0, 6.0);
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] += a * std::exp(-0.5 * (i - c) * (i - c) / (s * s));
  }
  return v;
}

}  // namespace gen
