#include "gelscan/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "gelscan/error.hpp"

namespace gelscan {

namespace {

void require(bool ok, const std::string& field, const std::string& why) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, field + " " + why);
}

}  // namespace

void PipelineConfig::validate() const {
  require(std::isfinite(prominence_frac) && prominence_frac >= 0.0 && prominence_frac <= 1.0,
          "prominence_frac", "must lie in [0, 1]");
  require(std::isfinite(bracket_position) && bracket_position >= 0.0 && bracket_position <= 1.0,
          "bracket_position", "must lie in [0, 1]");
  if (alpha_override) {
    require(std::isfinite(*alpha_override) && *alpha_override > 0.0 && *alpha_override < 1.0,
            "alpha_override", "must lie in (0, 1)");
  }
  require(median_window >= 3 && median_window % 2 == 1, "median_window", "must be odd and >= 3");
  require(std::isfinite(binarize_epsilon) && binarize_epsilon >= 0.0, "binarize_epsilon",
          "must be >= 0");
  require(min_band_area >= 1, "min_band_area", "must be >= 1");
  if (roi) require(roi->width >= 1 && roi->height >= 1 && roi->x >= 0 && roi->y >= 0, "roi",
                   "must have a non-negative origin and positive size");
  require(std::isfinite(migration_origin), "migration_origin", "must be finite");
}

const GrayImage* PipelineResult::stage(const std::string& name) const noexcept {
  for (const auto& s : stages) {
    if (s.name == name) return &s.image;
  }
  return nullptr;
}

GrayImage shift(const GrayImage& img, double th_level) {
  std::vector<double> out(img.pixels().begin(), img.pixels().end());
  for (double& v : out) {
    if (v < th_level) {
      throw Error(ErrorCode::NegativeResult,
                  "pixel " + std::to_string(v) + " lies below the threshold level " +
                      std::to_string(th_level) + "; threshold the image first");
    }
    v -= th_level;
  }
  return img.with_pixels(std::move(out));
}

GrayImage denoise(const GrayImage& img, const PipelineConfig& cfg) {
  return median_filter(top_hat(img, cfg.se), cfg.median_window);
}

GrayImage enhance(const GrayImage& img, const StructuringElement& se) {
  const GrayImage top = top_hat(img, se);
  const GrayImage bot = bottom_hat(img, se);
  const double hi = img.max_range();
  std::vector<double> out(img.size());
  auto p = img.pixels();
  auto t = top.pixels();
  auto b = bot.pixels();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(p[i] + t[i] - b[i], 0.0, hi);
  return img.with_pixels(std::move(out));
}

ThresholdDecision decide_threshold(const GrayImage& img, const PipelineConfig& cfg) {
  const auto [lo, hi] = min_max(img);
  if (!(hi > lo)) throw Error(ErrorCode::ConstantImage, "image has a single intensity value");

  ThresholdDecision d;
  if (cfg.alpha_override) {
    d.source = ThresholdSource::UserOverride;
    d.alpha = *cfg.alpha_override;
  } else {
    const StdProfile profile = std_profile(img, cfg.axis);
    d.source = ThresholdSource::Automatic;
    d.th_level_std = profile_threshold(profile, cfg.prominence_frac, cfg.bracket_position);
    d.alpha = compute_alpha(profile, d.th_level_std);
  }
  d.th_level = compute_threshold_level(img, d.alpha);
  return d;
}

namespace {

class StageClock {
 public:
  explicit StageClock(std::vector<StageTiming>& sink) : sink_(sink) {}

  template <class F>
  auto run(const std::string& name, F&& body) {
    const auto start = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(body())>) {
        body();
        record(name, start);
      } else {
        auto value = body();
        record(name, start);
        return value;
      }
    } catch (const Error& e) {
      throw e.at_stage(name);
    }
  }

 private:
  void record(const std::string& name, std::chrono::steady_clock::time_point start) {
    const std::chrono::duration<double, std::milli> dt = std::chrono::steady_clock::now() - start;
    sink_.push_back({name, dt.count()});
  }

  std::vector<StageTiming>& sink_;
};

}  // namespace

PipelineResult run_pipeline(const GrayImage& img, const PipelineConfig& cfg) {
  cfg.validate();
  PipelineResult result;
  StageClock clock(result.timings);

  int off_x = 0;
  int off_y = 0;
  GrayImage working = cfg.roi ? clock.run("input", [&] {
    return img.crop(cfg.roi->x, cfg.roi->y, cfg.roi->width, cfg.roi->height);
  })
                              : img;
  if (cfg.roi) {
    off_x = cfg.roi->x;
    off_y = cfg.roi->y;
  }
  result.stages.push_back({"input", working});

  if (cfg.enhance) {
    working = clock.run("enhance", [&] { return enhance(working, cfg.enhance_se); });
    result.stages.push_back({"enhanced", working});
  }

  GrayImage thresholded = clock.run("threshold", [&] {
    result.decision = decide_threshold(working, cfg);
    return apply_threshold(working, result.decision.th_level);
  });
  result.stages.push_back({"thresholded", thresholded});

  GrayImage shifted = clock.run("shift", [&] { return shift(thresholded, result.decision.th_level); });
  result.stages.push_back({"shifted", shifted});

  GrayImage filtered = clock.run("denoise", [&] { return denoise(shifted, cfg); });
  result.stages.push_back({"filtered", filtered});

  result.bands = clock.run("detect", [&] {
    const LabelMap labels =
        connected_components(binarize(filtered, cfg.binarize_epsilon), cfg.connectivity);
    auto bands = measure_bands(labels, filtered, cfg.min_band_area);
    for (auto& b : bands) {
      b.centroid_x += off_x;
      b.centroid_y += off_y;
      b.bbox.x_min += off_x;
      b.bbox.x_max += off_x;
      b.bbox.y_min += off_y;
      b.bbox.y_max += off_y;
    }
    return bands;
  });
  return result;
}

}  // namespace gelscan
