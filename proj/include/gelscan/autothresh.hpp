#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "gelscan/image.hpp"

namespace gelscan {

enum class ProfileAxis {
  AcrossColumns,  // one sigma per column
  AcrossRows,     // one sigma per row
};

std::string_view axis_name(ProfileAxis axis) noexcept;

/// Per-line population standard deviation of an image.
struct StdProfile {
  ProfileAxis axis = ProfileAxis::AcrossColumns;
  std::vector<double> values;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
};

enum class ThresholdSource { Automatic, UserOverride };

std::string_view source_name(ThresholdSource source) noexcept;

/// Audit record of how the background threshold was chosen.
struct ThresholdDecision {
  double th_level_std = 0.0;  // cut on the sigma profile; 0 for overrides
  double alpha = 0.0;
  double th_level = 0.0;  // intensity units
  ThresholdSource source = ThresholdSource::Automatic;

  friend bool operator==(const ThresholdDecision&, const ThresholdDecision&) = default;
};

/// Throws DegenerateGeometry when the profiled lines hold fewer than two samples.
StdProfile std_profile(const GrayImage& img, ProfileAxis axis);

struct ProfilePeak {
  std::size_t index = 0;  // leftmost index of the (possibly flat) maximum
  double value = 0.0;
  double prominence = 0.0;
};

/// Strict local maxima of `values`. A plateau is one peak reported at its
/// leftmost index; plateaus touching either end and the end samples
/// themselves are never peaks. Prominence is the height above the higher of
/// the two lowest points reached before meeting a strictly higher sample
/// (or the end of the sequence) on each side.
std::vector<ProfilePeak> find_peaks(const std::vector<double>& values);

/// Threshold on the sigma profile: sigma_min + bracket * (p_min - sigma_min),
/// where p_min is the lowest peak whose prominence is at least
/// prominence_frac * (sigma_max - sigma_min). bracket = 0.5 gives the
/// midpoint between the weakest significant peak and the profile minimum.
/// Throws FlatProfile or NoPeaks.
double profile_threshold(const StdProfile& profile, double prominence_frac,
                         double bracket = 0.5);

/// (th_level_std - sigma_min) / (sigma_max - sigma_min). Throws FlatProfile.
double compute_alpha(const StdProfile& profile, double th_level_std);

/// alpha * (max - min) + min over the image. Throws ConstantImage.
double compute_threshold_level(const GrayImage& img, double alpha);

/// Background equalisation: every pixel not above th_level becomes th_level.
GrayImage apply_threshold(const GrayImage& img, double th_level);

}  // namespace gelscan
