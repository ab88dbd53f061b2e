#include "gelscan/autothresh.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gelscan/error.hpp"

namespace gelscan {

std::string_view axis_name(ProfileAxis axis) noexcept {
  return axis == ProfileAxis::AcrossColumns ? "cols" : "rows";
}

std::string_view source_name(ThresholdSource source) noexcept {
  return source == ThresholdSource::Automatic ? "Automatic" : "UserOverride";
}

StdProfile std_profile(const GrayImage& img, ProfileAxis axis) {
  const bool by_column = axis == ProfileAxis::AcrossColumns;
  const int lines = by_column ? img.width() : img.height();
  const int samples = by_column ? img.height() : img.width();
  if (samples < 2) {
    throw Error(ErrorCode::DegenerateGeometry,
                std::string("image is one pixel thick along the profiled dimension (") +
                    std::string(axis_name(axis)) + ")");
  }

  // Two passes (mean, then squared deviations) keep the result stable for
  // 16-bit data and make it independent of summation tricks.
  std::vector<double> sum(static_cast<std::size_t>(lines), 0.0);
  for (int y = 0; y < img.height(); ++y) {
    auto r = img.row(y);
    for (int x = 0; x < img.width(); ++x) sum[static_cast<std::size_t>(by_column ? x : y)] += r[x];
  }
  std::vector<double> mean(sum.size());
  for (std::size_t k = 0; k < sum.size(); ++k) mean[k] = sum[k] / samples;

  std::vector<double> ss(static_cast<std::size_t>(lines), 0.0);
  for (int y = 0; y < img.height(); ++y) {
    auto r = img.row(y);
    for (int x = 0; x < img.width(); ++x) {
      const auto k = static_cast<std::size_t>(by_column ? x : y);
      const double d = r[x] - mean[k];
      ss[k] += d * d;
    }
  }

  StdProfile out;
  out.axis = axis;
  out.values.resize(ss.size());
  for (std::size_t k = 0; k < ss.size(); ++k) out.values[k] = std::sqrt(ss[k] / samples);
  auto [lo, hi] = std::minmax_element(out.values.begin(), out.values.end());
  out.sigma_min = *lo;
  out.sigma_max = *hi;
  return out;
}

std::vector<ProfilePeak> find_peaks(const std::vector<double>& v) {
  std::vector<ProfilePeak> peaks;
  const std::size_t n = v.size();
  std::size_t i = 1;
  while (i + 1 < n) {
    if (!(v[i] > v[i - 1])) {
      ++i;
      continue;
    }
    std::size_t end = i;  // last index of the plateau starting at i
    while (end + 1 < n && v[end + 1] == v[i]) ++end;
    if (end + 1 < n && v[end + 1] < v[i]) {
      const double h = v[i];
      double left_low = h;
      for (std::size_t l = i; l-- > 0;) {
        if (v[l] > h) break;
        left_low = std::min(left_low, v[l]);
      }
      double right_low = h;
      for (std::size_t r = end + 1; r < n; ++r) {
        if (v[r] > h) break;
        right_low = std::min(right_low, v[r]);
      }
      peaks.push_back({i, h, h - std::max(left_low, right_low)});
    }
    i = end + 1;
  }
  return peaks;
}

double profile_threshold(const StdProfile& profile, double prominence_frac, double bracket) {
  const double range = profile.sigma_max - profile.sigma_min;
  if (!(range > 0.0)) {
    throw Error(ErrorCode::FlatProfile, "standard-deviation profile is constant");
  }
  const double needed = prominence_frac * range;
  bool found = false;
  double p_min = 0.0;
  for (const auto& peak : find_peaks(profile.values)) {
    if (peak.prominence >= needed && (!found || peak.value < p_min)) {
      p_min = peak.value;
      found = true;
    }
  }
  if (!found) {
    throw Error(ErrorCode::NoPeaks,
                "no profile peak reaches prominence " + std::to_string(needed) +
                    "; set an explicit alpha override");
  }
  return profile.sigma_min + bracket * (p_min - profile.sigma_min);
}

double compute_alpha(const StdProfile& profile, double th_level_std) {
  const double range = profile.sigma_max - profile.sigma_min;
  if (!(range > 0.0)) {
    throw Error(ErrorCode::FlatProfile, "standard-deviation profile is constant");
  }
  return (th_level_std - profile.sigma_min) / range;
}

double compute_threshold_level(const GrayImage& img, double alpha) {
  const auto [lo, hi] = min_max(img);
  if (!(hi > lo)) {
    throw Error(ErrorCode::ConstantImage, "image has a single intensity value");
  }
  return alpha * (hi - lo) + lo;
}

GrayImage apply_threshold(const GrayImage& img, double th_level) {
  std::vector<double> out(img.pixels().begin(), img.pixels().end());
  for (double& v : out) v = v > th_level ? v : th_level;
  return img.with_pixels(std::move(out));
}

}  // namespace gelscan
