#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "json.hpp"

#include "gelscan/image.hpp"

namespace gelscan {

// Seeded synthetic gel images with ground truth, used as the test oracle.
//
// Randomness comes from std::mt19937_64 (fully specified by the C++
// standard) and is turned into doubles as (x >> 11) * 2^-53. Placement and
// noise draw from two independent streams, seeded with `seed` and
// `seed ^ 0x9E3779B97F4A7C15`, so changing an amplitude never moves the
// impulse noise. See docs/synthgel.md; the algorithm is frozen.

struct BandSigma {
  double x = 10.0;
  double y = 4.0;

  friend bool operator==(const BandSigma&, const BandSigma&) = default;
};

struct Background {
  double base = 0.0;       // intensity at the low end of the gradient
  double gradient = 0.0;   // rise across the frame along `direction`
  double direction = 0.0;  // radians; 0 rises left to right, pi/2 top to bottom

  friend bool operator==(const Background&, const Background&) = default;
};

struct Smear {
  int lane = 0;
  double extent = 0.0;  // extra sigma (px) on the trailing (+y) side

  friend bool operator==(const Smear&, const Smear&) = default;
};

struct BandCenter {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const BandCenter&, const BandCenter&) = default;
};

struct SyntheticSpec {
  std::uint64_t seed = 0;
  int width = 512;
  int height = 512;
  int bit_depth = 8;
  int lanes = 0;
  std::vector<int> bands_per_lane;      // one count per lane
  std::vector<double> band_amplitudes;  // one per band, lane by lane
  std::vector<BandSigma> band_sigmas;   // one per band
  Background background;
  double salt_pepper_frac = 0.0;
  std::optional<Smear> smear;
  // Explicit centers skip random placement (one per band, same order).
  std::vector<BandCenter> centers;
  // Round to integer samples, as a file written to disk would be.
  bool quantize = true;

  int band_count() const noexcept;
  /// Throws InvalidArgument.
  void validate() const;

  friend bool operator==(const SyntheticSpec&, const SyntheticSpec&) = default;
};

struct PlantedBand {
  double center_x = 0.0;
  double center_y = 0.0;
  double amplitude = 0.0;
  BandSigma sigma;
  int lane = 0;
  // Pixels where the band's own noise-free contribution is >= amplitude / 2.
  std::int64_t half_max_area = 0;

  friend bool operator==(const PlantedBand&, const PlantedBand&) = default;
};

struct GroundTruth {
  std::vector<PlantedBand> bands;
  double noise_sigma = 0.0;  // RMS of (noisy - noise-free) over the frame

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct SyntheticGel {
  GrayImage image;
  GrayImage clean;  // same construction without impulse noise
  GroundTruth truth;
};

/// Throws SpecOverflow when a band's +-3 sigma box leaves the frame or random
/// placement cannot keep bands apart.
SyntheticGel synth_gel(const SyntheticSpec& spec);

/// Clean/average regime: 512x512, 5-20 bands, gradient up to 30% of range,
/// 1% salt-and-pepper, amplitudes 0.5-0.9 of the headroom above the
/// background.
SyntheticSpec clean_spec(std::uint64_t seed);

/// Like clean_spec on a flat background, with one band lowered to
/// 1.0-1.4x the noise sigma.
SyntheticSpec faint_spec(std::uint64_t seed);

nlohmann::ordered_json spec_to_json(const SyntheticSpec& spec);
SyntheticSpec spec_from_json(const nlohmann::json& j);
nlohmann::ordered_json truth_to_json(const GroundTruth& truth);
GroundTruth truth_from_json(const nlohmann::json& j);

/// Writes the image and a "<stem>.truth.json" sidecar holding spec and truth.
/// Returns the sidecar path.
std::filesystem::path write_synthetic(const SyntheticSpec& spec, const SyntheticGel& gel,
                                      const std::filesystem::path& image_path);

}  // namespace gelscan
