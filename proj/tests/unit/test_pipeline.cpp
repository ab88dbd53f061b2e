#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "gelscan/config_file.hpp"
#include "gelscan/error.hpp"
#include "gelscan/pipeline.hpp"
#include "gelscan/synthgel.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace gelscan;

namespace {

Error error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected a gelscan::Error");
  return Error(ErrorCode::InvalidArgument, "");
}

// A gel in the comfortable regime: flat background, 1% impulses.
SyntheticSpec easy_spec(std::uint64_t seed) {
  SyntheticSpec s;
  s.seed = seed;
  s.width = 256;
  s.height = 256;
  s.lanes = 3;
  s.bands_per_lane = {2, 3, 2};
  s.band_amplitudes = {170, 150, 190, 160, 140, 180, 165};
  s.band_sigmas.assign(7, {9.0, 4.0});
  s.background = {8, 0, 0};
  s.salt_pepper_frac = 0.01;
  return s;
}

double mean_box(const GrayImage& img, int cx, int cy, int r) {
  double sum = 0;
  int n = 0;
  for (int y = cy - r; y <= cy + r; ++y)
    for (int x = cx - r; x <= cx + r; ++x) {
      if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) continue;
      sum += img.at(x, y);
      ++n;
    }
  return sum / n;
}

}  // namespace

TEST_CASE("shift") {
  CHECK(shift(GrayImage(3, 1, {80, 80, 200}), 80) == GrayImage(3, 1, {0, 0, 120}));
  const GrayImage img(3, 1, {1, 2, 3});
  CHECK(shift(img, 0) == img);
  CHECK(error_of([&] { shift(img, 2); }).code() == ErrorCode::NegativeResult);

  gen::Rng rng(51);
  for (int i = 0; i < 50; ++i) {
    const GrayImage g = gen::real_image(rng, 16, 16);
    const double th = rng.uniform(0, 255);
    const GrayImage s = shift(apply_threshold(g, th), th);
    for (std::size_t k = 0; k < g.size(); ++k) CHECK(s.pixels()[k] == std::max(g.pixels()[k] - th, 0.0));
  }
}

TEST_CASE("denoise") {
  PipelineConfig cfg;
  CHECK(denoise(GrayImage::filled(30, 20, 17), cfg) == GrayImage::filled(30, 20, 0));

  gen::Rng rng(52);
  cfg.se = StructuringElement::disk(3);
  for (int i = 0; i < 5; ++i) {
    const GrayImage g = gen::image(rng, 40, 30);
    CHECK(denoise(g, cfg) == median_filter(top_hat(g, cfg.se), cfg.median_window));
  }
}

TEST_CASE("denoise leaves no isolated impulse pixels") {
  const SyntheticGel gel = synth_gel(easy_spec(3));
  PipelineConfig cfg;
  const ThresholdDecision d = decide_threshold(gel.image, cfg);
  const GrayImage filtered = denoise(shift(apply_threshold(gel.image, d.th_level), d.th_level), cfg);
  const BandMask mask = binarize(filtered, 0);
  const auto labels = oracle::flood_labels(mask, 8);
  std::map<std::int32_t, int> sizes;
  for (auto l : labels)
    if (l) ++sizes[l];
  int singletons = 0;
  for (auto [l, n] : sizes) singletons += n == 1;
  CHECK(singletons == 0);
}

TEST_CASE("enhance") {
  const GrayImage c = GrayImage::filled(12, 12, 33);
  CHECK(enhance(c, StructuringElement::disk(10)) == c);

  std::vector<double> px(9 * 9, 0.0);
  px[4 * 9 + 4] = 100;
  const GrayImage spot(9, 9, px);
  px[4 * 9 + 4] = 200;
  CHECK(enhance(spot, StructuringElement::disk(1)) == GrayImage(9, 9, px));

  // Clamped at the top of the range.
  std::vector<double> hot(9 * 9, 0.0);
  hot[40] = 200;
  CHECK(enhance(GrayImage(9, 9, hot), StructuringElement::disk(1)).at(4, 4) == 255);
}

TEST_CASE("enhance raises the contrast of a faint band") {
  SyntheticSpec s;
  s.seed = 77;
  s.width = 160;
  s.height = 120;
  s.lanes = 1;
  s.bands_per_lane = {1};
  s.band_sigmas = {{9.0, 4.0}};
  s.centers = {{80, 60}};
  s.background = {10, 0, 0};
  s.salt_pepper_frac = 0.01;
  s.band_amplitudes = {1.0};
  const double sigma = synth_gel(s).truth.noise_sigma;
  s.band_amplitudes = {1.2 * sigma};
  const SyntheticGel gel = synth_gel(s);
  const GrayImage enh = enhance(gel.image, StructuringElement::disk(10));
  auto contrast = [](const GrayImage& img) { return mean_box(img, 80, 60, 2) - mean_box(img, 20, 60, 6); };
  CHECK(contrast(enh) > contrast(gel.image));
}

TEST_CASE("run_pipeline on a synthetic gel") {
  const SyntheticSpec spec = easy_spec(1);
  const SyntheticGel gel = synth_gel(spec);
  const PipelineResult r = run_pipeline(gel.image, PipelineConfig{});
  CHECK(r.bands.size() == gel.truth.bands.size());
  CHECK(r.decision.alpha > 0);
  CHECK(r.decision.alpha < 1);
  CHECK(r.decision.source == ThresholdSource::Automatic);
  const auto [lo, hi] = min_max(gel.image);
  CHECK((lo <= r.decision.th_level && r.decision.th_level <= hi));

  std::vector<std::string> names;
  for (const auto& s : r.stages) {
    names.push_back(s.name);
    CHECK(s.image.width() == gel.image.width());
    CHECK(s.image.height() == gel.image.height());
  }
  CHECK(names == std::vector<std::string>{"input", "thresholded", "shifted", "filtered"});

  // Composition law and amplitude preservation.
  const GrayImage& in = *r.stage("input");
  const GrayImage& th = *r.stage("thresholded");
  const GrayImage& sh = *r.stage("shifted");
  for (std::size_t k = 0; k < in.size(); ++k)
    CHECK(sh.pixels()[k] == std::max(in.pixels()[k] - r.decision.th_level, 0.0));
  const auto se = min_max(sh), te = min_max(th);
  CHECK(se.max - se.min == te.max - r.decision.th_level);
  for (std::size_t k = 1; k < r.bands.size(); ++k) CHECK(r.bands[k - 1].label < r.bands[k].label);
}

TEST_CASE("filtered foreground covers the noise-free bands above the threshold") {
  for (std::uint64_t seed : {3, 4, 5}) {
    const SyntheticGel gel = synth_gel(easy_spec(seed));
    const PipelineResult r = run_pipeline(gel.image, PipelineConfig{});
    const std::size_t fg = binarize(*r.stage("filtered"), 0).count();
    std::size_t planted = 0;
    for (double v : gel.clean.pixels()) planted += v > r.decision.th_level;
    CAPTURE(seed);
    CHECK(std::abs(static_cast<double>(fg) - planted) <= 0.15 * planted);
  }
}

TEST_CASE("measured centroids sit on planted bands") {
  for (std::uint64_t seed : {6, 7}) {
    const SyntheticGel gel = synth_gel(easy_spec(seed));
    const PipelineResult r = run_pipeline(gel.image, PipelineConfig{});
    REQUIRE(!r.bands.empty());
    for (const Band& b : r.bands) {
      double nearest = INFINITY;
      for (const auto& t : gel.truth.bands)
        nearest = std::min(nearest, std::hypot(b.centroid_x - t.center_x, b.centroid_y - t.center_y));
      CHECK(nearest <= 5.0);
    }
  }
}

TEST_CASE("run_pipeline is deterministic") {
  const SyntheticGel gel = synth_gel(clean_spec(4));
  PipelineConfig cfg;
  cfg.enhance = true;
  const PipelineResult a = run_pipeline(gel.image, cfg);
  const PipelineResult b = run_pipeline(gel.image, cfg);
  REQUIRE(a.stages.size() == b.stages.size());
  for (std::size_t k = 0; k < a.stages.size(); ++k) {
    CHECK(a.stages[k].name == b.stages[k].name);
    CHECK(a.stages[k].image == b.stages[k].image);
  }
  CHECK(a.decision == b.decision);
  CHECK(a.bands == b.bands);
  CHECK(a.stages[1].name == "enhanced");
}

TEST_CASE("errors name the failing stage") {
  const Error e = error_of([] { run_pipeline(GrayImage::filled(20, 20, 9), PipelineConfig{}); });
  CHECK(e.code() == ErrorCode::ConstantImage);
  CHECK(e.stage() == "threshold");

  // Column k alternates 0 and 2k: sigma rises monotonically, so no peak.
  std::vector<double> px;
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 30; ++x) px.push_back(y % 2 ? 2.0 * x : 0.0);
  const GrayImage ramp(30, 10, px);
  const Error np = error_of([&] { run_pipeline(ramp, PipelineConfig{}); });
  CHECK(np.code() == ErrorCode::NoPeaks);
  CHECK(np.stage() == "threshold");
  CHECK(std::string(np.what()).find("alpha") != std::string::npos);

  PipelineConfig manual;
  manual.alpha_override = 0.3;
  const PipelineResult ok = run_pipeline(ramp, manual);
  CHECK(ok.decision.source == ThresholdSource::UserOverride);
  CHECK(ok.decision.alpha == 0.3);
  CHECK(ok.decision.th_level_std == 0.0);
}

TEST_CASE("ROI results are reported in full-frame coordinates") {
  const SyntheticGel gel = synth_gel(easy_spec(2));
  PipelineConfig cfg;
  cfg.roi = Roi{40, 10, 180, 220};
  const PipelineResult r = run_pipeline(gel.image, cfg);
  const PipelineResult direct = run_pipeline(gel.image.crop(40, 10, 180, 220), PipelineConfig{});
  REQUIRE(r.bands.size() == direct.bands.size());
  for (std::size_t k = 0; k < r.bands.size(); ++k) {
    CHECK(r.bands[k].centroid_x == direct.bands[k].centroid_x + 40);
    CHECK(r.bands[k].centroid_y == direct.bands[k].centroid_y + 10);
    CHECK(r.bands[k].bbox.x_min == direct.bands[k].bbox.x_min + 40);
  }
  cfg.roi = Roi{200, 0, 100, 10};
  CHECK(error_of([&] { run_pipeline(gel.image, cfg); }).stage() == "input");
}

TEST_CASE("config validation") {
  PipelineConfig cfg;
  cfg.median_window = 4;
  CHECK(error_of([&] { cfg.validate(); }).code() == ErrorCode::InvalidArgument);
  cfg = {};
  cfg.alpha_override = 1.0;
  CHECK(error_of([&] { cfg.validate(); }).code() == ErrorCode::InvalidArgument);
  cfg = {};
  cfg.bracket_position = -0.1;
  CHECK(error_of([&] { cfg.validate(); }).code() == ErrorCode::InvalidArgument);
  cfg = {};
  cfg.min_band_area = 0;
  CHECK(error_of([&] { cfg.validate(); }).code() == ErrorCode::InvalidArgument);
}

TEST_CASE("config file round-trips") {
  const PipelineConfig defaults;
  CHECK(parse_config_text(to_config_text(defaults)) == defaults);

  gen::Rng rng(53);
  for (int i = 0; i < 200; ++i) {
    PipelineConfig c;
    c.axis = rng.chance(0.5) ? ProfileAxis::AcrossRows : ProfileAxis::AcrossColumns;
    c.prominence_frac = rng.uniform();
    c.bracket_position = rng.uniform();
    if (rng.chance(0.5)) c.alpha_override = rng.uniform(1e-6, 0.999);
    c.se = rng.chance(0.5) ? StructuringElement::disk(rng.integer(0, 20))
                           : StructuringElement::square(2 * rng.integer(0, 8) + 1);
    c.median_window = 2 * rng.integer(1, 5) + 1;
    c.enhance = rng.chance(0.5);
    c.binarize_epsilon = rng.uniform(0, 10);
    c.min_band_area = rng.integer(1, 500);
    c.connectivity = rng.chance(0.5) ? Connectivity::Four : Connectivity::Eight;
    if (rng.chance(0.5)) c.roi = Roi{rng.integer(0, 50), rng.integer(0, 50), rng.integer(1, 500), rng.integer(1, 500)};
    c.migration_axis = rng.chance(0.5) ? MigrationAxis::Vertical : MigrationAxis::Horizontal;
    c.migration_origin = rng.uniform(-100, 100);
    CHECK(parse_config_text(to_config_text(c)) == c);
  }
}

TEST_CASE("config file errors carry line numbers") {
  const Error bad = error_of([] { parse_config_text("# x\naxis = cols\nmedian_window = five\n"); });
  CHECK(bad.code() == ErrorCode::InvalidArgument);
  CHECK(std::string(bad.what()).find("line 3") != std::string::npos);
  CHECK(std::string(error_of([] { parse_config_text("colour = red\n"); }).what()).find("colour") !=
        std::string::npos);
  CHECK(error_of([] { parse_config_text("just words\n"); }).code() == ErrorCode::InvalidArgument);
  CHECK(parse_config_text("enhance = true  # comment\nroi = 1, 2, 3, 4\n").roi == Roi{1, 2, 3, 4});
}
