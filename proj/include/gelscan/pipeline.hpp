#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gelscan/autothresh.hpp"
#include "gelscan/bands.hpp"
#include "gelscan/image.hpp"
#include "gelscan/morph.hpp"

namespace gelscan {

struct Roi {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  friend bool operator==(const Roi&, const Roi&) = default;
};

enum class MigrationAxis { Vertical, Horizontal };

struct PipelineConfig {
  ProfileAxis axis = ProfileAxis::AcrossColumns;
  double prominence_frac = 0.05;
  double bracket_position = 0.5;
  std::optional<double> alpha_override;
  StructuringElement se = StructuringElement::disk(10);
  int median_window = 5;
  bool enhance = false;
  StructuringElement enhance_se = StructuringElement::disk(10);
  double binarize_epsilon = 0.0;
  std::int64_t min_band_area = 20;
  Connectivity connectivity = Connectivity::Eight;
  std::optional<Roi> roi;
  MigrationAxis migration_axis = MigrationAxis::Vertical;
  double migration_origin = 0.0;

  /// Throws InvalidArgument naming the first offending field.
  void validate() const;

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

/// Named snapshot of one pipeline stage.
struct Stage {
  std::string name;
  GrayImage image;
};

struct StageTiming {
  std::string name;
  double milliseconds = 0.0;
};

struct PipelineResult {
  std::vector<Stage> stages;  // input, [enhanced], thresholded, shifted, filtered
  ThresholdDecision decision;
  std::vector<Band> bands;  // in full-frame coordinates, sorted by label
  std::vector<StageTiming> timings;

  /// nullptr when the stage was not produced.
  const GrayImage* stage(const std::string& name) const noexcept;
};

/// img - th_level. Every input pixel must be >= th_level (NegativeResult).
GrayImage shift(const GrayImage& img, double th_level);

/// median_filter(top_hat(img, cfg.se), cfg.median_window), applied once.
GrayImage denoise(const GrayImage& img, const PipelineConfig& cfg);

/// clamp(img + top_hat(img) - bottom_hat(img), 0, max_range).
GrayImage enhance(const GrayImage& img, const StructuringElement& se);

/// Threshold selection alone: the automatic sigma-profile route or the
/// configured override. Throws ConstantImage, FlatProfile or NoPeaks.
ThresholdDecision decide_threshold(const GrayImage& img, const PipelineConfig& cfg);

/// Full analysis: [enhance] -> threshold -> shift -> denoise -> detect.
/// Errors carry the name of the failing stage (enhance, threshold, shift,
/// denoise, detect).
PipelineResult run_pipeline(const GrayImage& img, const PipelineConfig& cfg);

}  // namespace gelscan
