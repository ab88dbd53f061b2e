#include "gelscan/synthgel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "gelscan/error.hpp"
#include "gelscan/image_io.hpp"

namespace gelscan {

namespace {

constexpr std::uint64_t kNoiseStreamKey = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kPresetStreamKey = 0xD1B54A32D192ED03ULL;
constexpr int kPlacementAttempts = 1000;

class Uniform {
 public:
  explicit Uniform(std::uint64_t seed) : engine_(seed) {}
  double operator()() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // Integer in [lo, hi].
  int between(int lo, int hi) { return lo + static_cast<int>((*this)() * (hi - lo + 1)); }

 private:
  std::mt19937_64 engine_;
};

struct Placed {
  double cx, cy, amplitude;
  BandSigma sigma;
  double tail;  // sigma on the +y side
  int lane;
};

double contribution(const Placed& b, double x, double y) {
  const double dx = (x - b.cx) / b.sigma.x;
  const double sy = y > b.cy ? b.tail : b.sigma.y;
  const double dy = (y - b.cy) / sy;
  return b.amplitude * std::exp(-0.5 * (dx * dx + dy * dy));
}

struct Window {
  int x0, x1, y0, y1;
};

// Region where a band is rendered; beyond 5 sigma its contribution is < 4e-6 A.
Window render_window(const Placed& b, int w, int h) {
  return {std::max(0, static_cast<int>(std::floor(b.cx - 5.0 * b.sigma.x))),
          std::min(w - 1, static_cast<int>(std::ceil(b.cx + 5.0 * b.sigma.x))),
          std::max(0, static_cast<int>(std::floor(b.cy - 5.0 * b.sigma.y))),
          std::min(h - 1, static_cast<int>(std::ceil(b.cy + 5.0 * b.tail)))};
}

void check_inside(const Placed& b, int w, int h) {
  if (b.cx - 3.0 * b.sigma.x < 0.0 || b.cx + 3.0 * b.sigma.x > w - 1 ||
      b.cy - 3.0 * b.sigma.y < 0.0 || b.cy + 3.0 * b.tail > h - 1) {
    throw Error(ErrorCode::SpecOverflow, "band at (" + std::to_string(b.cx) + ", " +
                                             std::to_string(b.cy) +
                                             ") extends past the image border");
  }
}

// Keeps each band's render window clear of its neighbours' half-max cores.
bool far_enough(const Placed& a, const Placed& b) {
  const double reach = 6.5 * std::max({a.sigma.y, a.tail, b.sigma.y, b.tail}) + 1.0;
  return std::abs(a.cy - b.cy) >= reach;
}

std::vector<Placed> place_bands(const SyntheticSpec& spec, Uniform& rng) {
  std::vector<Placed> placed;
  std::size_t k = 0;
  for (int lane = 0; lane < spec.lanes; ++lane) {
    const double cx = (lane + 0.5) * spec.width / spec.lanes;
    const bool smeared = spec.smear && spec.smear->lane == lane;
    const std::size_t lane_start = placed.size();
    for (int i = 0; i < spec.bands_per_lane[static_cast<std::size_t>(lane)]; ++i, ++k) {
      Placed b{cx, 0.0, spec.band_amplitudes[k], spec.band_sigmas[k], spec.band_sigmas[k].y, lane};
      if (smeared) b.tail += spec.smear->extent;
      if (!spec.centers.empty()) {
        b.cx = spec.centers[k].x;
        b.cy = spec.centers[k].y;
        check_inside(b, spec.width, spec.height);
        placed.push_back(b);
        continue;
      }
      const double lo = 3.0 * b.sigma.y;
      const double hi = spec.height - 1 - 3.0 * b.tail;
      bool ok = false;
      for (int attempt = 0; attempt < kPlacementAttempts && !ok; ++attempt) {
        b.cy = std::round(lo + rng() * (hi - lo));
        ok = b.cy >= lo && b.cy <= hi;
        for (std::size_t j = lane_start; ok && j < placed.size(); ++j) ok = far_enough(b, placed[j]);
      }
      if (!ok) {
        throw Error(ErrorCode::SpecOverflow,
                    "cannot fit " + std::to_string(spec.bands_per_lane[static_cast<std::size_t>(lane)]) +
                        " bands into lane " + std::to_string(lane));
      }
      check_inside(b, spec.width, spec.height);
      placed.push_back(b);
    }
  }
  return placed;
}

}  // namespace

int SyntheticSpec::band_count() const noexcept {
  int n = 0;
  for (int c : bands_per_lane) n += c;
  return n;
}

void SyntheticSpec::validate() const {
  auto require = [](bool ok, const std::string& why) {
    if (!ok) throw Error(ErrorCode::InvalidArgument, "synthetic spec: " + why);
  };
  require(width >= 1 && height >= 1, "width and height must be >= 1");
  require(bit_depth == 8 || bit_depth == 16, "bit_depth must be 8 or 16");
  require(lanes >= 0 && static_cast<int>(bands_per_lane.size()) == lanes,
          "bands_per_lane needs one entry per lane");
  for (int c : bands_per_lane) require(c >= 0, "band counts must be >= 0");
  const auto n = static_cast<std::size_t>(band_count());
  require(band_amplitudes.size() == n, "band_amplitudes needs one entry per band");
  require(band_sigmas.size() == n, "band_sigmas needs one entry per band");
  require(centers.empty() || centers.size() == n, "centers needs one entry per band");
  for (double a : band_amplitudes) require(std::isfinite(a) && a > 0.0, "amplitudes must be > 0");
  for (const auto& s : band_sigmas) {
    require(std::isfinite(s.x) && std::isfinite(s.y) && s.x > 0.0 && s.y > 0.0,
            "sigmas must be > 0");
  }
  require(salt_pepper_frac >= 0.0 && salt_pepper_frac <= 0.05, "salt_pepper_frac must lie in [0, 0.05]");
  require(std::isfinite(background.base) && std::isfinite(background.gradient) &&
              std::isfinite(background.direction),
          "background must be finite");
  if (smear) require(smear->extent >= 0.0 && smear->lane >= 0 && smear->lane < lanes, "bad smear");
}

SyntheticGel synth_gel(const SyntheticSpec& spec) {
  spec.validate();
  Uniform placement(spec.seed);
  Uniform noise(spec.seed ^ kNoiseStreamKey);
  const std::vector<Placed> placed = place_bands(spec, placement);

  const int w = spec.width;
  const int h = spec.height;
  const double range = GrayImage::max_range_for(spec.bit_depth);
  std::vector<double> px(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));

  // Background: base + gradient * t, t in [0, 1] along the direction.
  const double c = std::cos(spec.background.direction);
  const double s = std::sin(spec.background.direction);
  const double extent = std::abs(c) * (w - 1) + std::abs(s) * (h - 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double t = 0.5;
      if (extent > 0.0) t = ((x - 0.5 * (w - 1)) * c + (y - 0.5 * (h - 1)) * s) / extent + 0.5;
      px[static_cast<std::size_t>(y) * w + x] = spec.background.base + spec.background.gradient * t;
    }
  }

  GroundTruth truth;
  for (const Placed& b : placed) {
    const Window win = render_window(b, w, h);
    std::int64_t area = 0;
    for (int y = win.y0; y <= win.y1; ++y) {
      for (int x = win.x0; x <= win.x1; ++x) {
        const double g = contribution(b, x, y);
        px[static_cast<std::size_t>(y) * w + x] += g;
        if (g >= 0.5 * b.amplitude) ++area;
      }
    }
    truth.bands.push_back({b.cx, b.cy, b.amplitude, b.sigma, b.lane, area});
  }

  for (double& v : px) {
    v = std::clamp(v, 0.0, range);
    if (spec.quantize) v = quantize_sample(v, range);
  }
  GrayImage clean(w, h, px, spec.bit_depth);

  double sq = 0.0;
  const double half = spec.salt_pepper_frac / 2.0;
  for (double& v : px) {
    const double u = noise();
    const double before = v;
    if (u < half) v = 0.0;
    else if (u < spec.salt_pepper_frac) v = range;
    sq += (v - before) * (v - before);
  }
  truth.noise_sigma = std::sqrt(sq / static_cast<double>(px.size()));
  return {GrayImage(w, h, std::move(px), spec.bit_depth), std::move(clean), std::move(truth)};
}

SyntheticSpec clean_spec(std::uint64_t seed) {
  Uniform rng(seed ^ kPresetStreamKey);
  SyntheticSpec spec;
  spec.seed = seed;
  spec.width = 512;
  spec.height = 512;
  const int n = rng.between(5, 20);
  const int min_lanes = (n + 3) / 4;
  spec.lanes = std::min(n, rng.between(min_lanes, 6));
  spec.bands_per_lane.assign(static_cast<std::size_t>(spec.lanes), 1);
  for (int extra = n - spec.lanes; extra > 0;) {
    auto& slot = spec.bands_per_lane[static_cast<std::size_t>(rng.between(0, spec.lanes - 1))];
    if (slot < 4) {
      ++slot;
      --extra;
    }
  }
  const double range = 255.0;
  spec.background.base = (0.02 + 0.02 * rng()) * range;
  spec.background.gradient = 0.3 * rng() * range;
  spec.background.direction = 2.0 * std::numbers::pi * rng();
  // Amplitudes scale with the headroom left above the background so peaks
  // never clip.
  const double headroom = range - spec.background.base - spec.background.gradient;
  for (int i = 0; i < n; ++i) {
    spec.band_amplitudes.push_back((0.5 + 0.4 * rng()) * headroom);
    spec.band_sigmas.push_back({8.0 + 4.0 * rng(), 3.0 + 2.0 * rng()});
  }
  spec.salt_pepper_frac = 0.01;
  return spec;
}

SyntheticSpec faint_spec(std::uint64_t seed) {
  SyntheticSpec spec = clean_spec(seed);
  Uniform rng(seed ^ kPresetStreamKey ^ 0xFA1A7ULL);
  // Flat background: this regime isolates faintness from non-uniformity.
  spec.background.gradient = 0.0;
  const double headroom = 255.0 - spec.background.base - spec.background.gradient;
  for (double& a : spec.band_amplitudes) a = (0.5 + 0.4 * rng()) * headroom;
  const auto faint = static_cast<std::size_t>(rng.between(0, spec.band_count() - 1));
  const double factor = 1.0 + 0.4 * rng();
  // The noise sigma depends slightly on the image under the impulses, so
  // settle the faint amplitude with a second pass.
  for (int pass = 0; pass < 2; ++pass) {
    const double sigma = synth_gel(spec).truth.noise_sigma;
    spec.band_amplitudes[faint] = factor * sigma;
  }
  return spec;
}

// ---------------------------------------------------------------------------
// JSON sidecar

nlohmann::ordered_json spec_to_json(const SyntheticSpec& spec) {
  nlohmann::ordered_json j;
  j["seed"] = spec.seed;
  j["width"] = spec.width;
  j["height"] = spec.height;
  j["bit_depth"] = spec.bit_depth;
  j["lanes"] = spec.lanes;
  j["bands_per_lane"] = spec.bands_per_lane;
  j["band_amplitudes"] = spec.band_amplitudes;
  auto sigmas = nlohmann::ordered_json::array();
  for (const auto& s : spec.band_sigmas) sigmas.push_back({s.x, s.y});
  j["band_sigmas"] = std::move(sigmas);
  j["background"] = {{"base", spec.background.base},
                     {"gradient", spec.background.gradient},
                     {"direction", spec.background.direction}};
  j["salt_pepper_frac"] = spec.salt_pepper_frac;
  if (spec.smear) {
    j["smear"] = {{"lane", spec.smear->lane}, {"extent", spec.smear->extent}};
  } else {
    j["smear"] = nullptr;
  }
  auto centers = nlohmann::ordered_json::array();
  for (const auto& c : spec.centers) centers.push_back({c.x, c.y});
  j["centers"] = std::move(centers);
  j["quantize"] = spec.quantize;
  return j;
}

SyntheticSpec spec_from_json(const nlohmann::json& j) {
  try {
    SyntheticSpec spec;
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.width = j.at("width").get<int>();
    spec.height = j.at("height").get<int>();
    spec.bit_depth = j.value("bit_depth", 8);
    spec.lanes = j.at("lanes").get<int>();
    spec.bands_per_lane = j.at("bands_per_lane").get<std::vector<int>>();
    spec.band_amplitudes = j.at("band_amplitudes").get<std::vector<double>>();
    for (const auto& s : j.at("band_sigmas")) spec.band_sigmas.push_back({s.at(0), s.at(1)});
    const auto& bg = j.at("background");
    spec.background = {bg.at("base"), bg.at("gradient"), bg.at("direction")};
    spec.salt_pepper_frac = j.at("salt_pepper_frac").get<double>();
    if (j.contains("smear") && !j["smear"].is_null()) {
      spec.smear = Smear{j["smear"].at("lane"), j["smear"].at("extent")};
    }
    if (j.contains("centers")) {
      for (const auto& c : j["centers"]) spec.centers.push_back({c.at(0), c.at(1)});
    }
    spec.quantize = j.value("quantize", true);
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptData, std::string("malformed synthetic spec: ") + e.what());
  }
}

nlohmann::ordered_json truth_to_json(const GroundTruth& truth) {
  nlohmann::ordered_json j;
  auto bands = nlohmann::ordered_json::array();
  for (const auto& b : truth.bands) {
    bands.push_back({{"center", {{"x", b.center_x}, {"y", b.center_y}}},
                     {"amplitude", b.amplitude},
                     {"sigma", {{"x", b.sigma.x}, {"y", b.sigma.y}}},
                     {"lane", b.lane},
                     {"half_max_area", b.half_max_area}});
  }
  j["bands"] = std::move(bands);
  j["noise_sigma"] = truth.noise_sigma;
  return j;
}

GroundTruth truth_from_json(const nlohmann::json& j) {
  try {
    GroundTruth truth;
    for (const auto& b : j.at("bands")) {
      truth.bands.push_back({b.at("center").at("x"), b.at("center").at("y"), b.at("amplitude"),
                             BandSigma{b.at("sigma").at("x"), b.at("sigma").at("y")},
                             b.at("lane"), b.at("half_max_area")});
    }
    truth.noise_sigma = j.at("noise_sigma").get<double>();
    return truth;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptData, std::string("malformed ground truth: ") + e.what());
  }
}

std::filesystem::path write_synthetic(const SyntheticSpec& spec, const SyntheticGel& gel,
                                      const std::filesystem::path& image_path) {
  save_image(gel.image, image_path);
  auto sidecar = image_path;
  sidecar.replace_filename(image_path.stem().string() + ".truth.json");
  nlohmann::ordered_json j;
  j["image"] = image_path.filename().string();
  j["spec"] = spec_to_json(spec);
  j["truth"] = truth_to_json(gel.truth);
  const std::string text = j.dump(2) + "\n";
  write_file_bytes(sidecar, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  return sidecar;
}

}  // namespace gelscan
