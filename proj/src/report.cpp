#include "gelscan/report.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "gelscan/config_file.hpp"
#include "gelscan/error.hpp"

namespace gelscan {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

double ratio_size(double area_n, double area_ref) {
  if (!(area_n >= 1.0) || !(area_ref >= 1.0)) {
    throw Error(ErrorCode::ZeroArea, "ratio-size needs both areas >= 1 pixel");
  }
  return area_n / (area_ref + area_n);
}

double relative_migration(const Band& band, const Band& ref, MigrationAxis axis, double origin) {
  auto distance = [&](const Band& b) {
    return std::abs((axis == MigrationAxis::Vertical ? b.centroid_y : b.centroid_x) - origin);
  };
  const double ref_distance = distance(ref);
  if (!(ref_distance > 0.0)) {
    throw Error(ErrorCode::ZeroMigration, "reference band lies on the migration origin");
  }
  return distance(band) / ref_distance;
}

double round_sig6(double v) {
  if (!std::isfinite(v) || v == 0.0) return v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return std::strtod(buf, nullptr);
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::IoFailure, "SHA-256 computation failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

BandReport make_report(const SourceInfo& source, const PipelineConfig& cfg,
                       const PipelineResult& result, std::optional<std::int32_t> reference) {
  BandReport rep;
  rep.source = source;
  rep.config = cfg;
  rep.decision = result.decision;
  rep.decision.th_level_std = round_sig6(rep.decision.th_level_std);
  rep.decision.alpha = round_sig6(rep.decision.alpha);
  rep.decision.th_level = round_sig6(rep.decision.th_level);
  rep.bands = result.bands;
  for (auto& b : rep.bands) {
    b.centroid_x = round_sig6(b.centroid_x);
    b.centroid_y = round_sig6(b.centroid_y);
    b.mean_intensity = round_sig6(b.mean_intensity);
    b.total_intensity = round_sig6(b.total_intensity);
  }
  if (reference) {
    // Quantities derive from the unrounded measurements.
    const auto ref_it = std::find_if(result.bands.begin(), result.bands.end(),
                                     [&](const Band& b) { return b.label == *reference; });
    if (ref_it == result.bands.end()) {
      throw Error(ErrorCode::UnknownBand, "reference band " + std::to_string(*reference) +
                                              " is not among the detected bands");
    }
    rep.reference = reference;
    for (const Band& b : result.bands) {
      rep.ratios.push_back(
          {b.label, round_sig6(ratio_size(static_cast<double>(b.area),
                                          static_cast<double>(ref_it->area)))});
      rep.migrations.push_back(
          {b.label, round_sig6(relative_migration(b, *ref_it, cfg.migration_axis,
                                                  cfg.migration_origin))});
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// JSON

ordered_json band_to_json(const Band& b) {
  ordered_json j;
  j["label"] = b.label;
  j["area"] = b.area;
  j["centroid"] = {{"x", b.centroid_x}, {"y", b.centroid_y}};
  j["bbox"] = {{"x_min", b.bbox.x_min},
               {"y_min", b.bbox.y_min},
               {"x_max", b.bbox.x_max},
               {"y_max", b.bbox.y_max}};
  j["mean_intensity"] = b.mean_intensity;
  j["total_intensity"] = b.total_intensity;
  return j;
}

Band band_from_json(const json& j) {
  Band b;
  b.label = j.at("label").get<std::int32_t>();
  b.area = j.at("area").get<std::int64_t>();
  b.centroid_x = j.at("centroid").at("x").get<double>();
  b.centroid_y = j.at("centroid").at("y").get<double>();
  const auto& box = j.at("bbox");
  b.bbox = {box.at("x_min").get<int>(), box.at("y_min").get<int>(), box.at("x_max").get<int>(),
            box.at("y_max").get<int>()};
  b.mean_intensity = j.at("mean_intensity").get<double>();
  b.total_intensity = j.at("total_intensity").get<double>();
  return b;
}

ordered_json decision_to_json(const ThresholdDecision& d) {
  ordered_json j;
  j["th_level_std"] = d.th_level_std;
  j["alpha"] = d.alpha;
  j["th_level"] = d.th_level;
  j["source"] = std::string(source_name(d.source));
  return j;
}

ThresholdDecision decision_from_json(const json& j) {
  ThresholdDecision d;
  d.th_level_std = j.at("th_level_std").get<double>();
  d.alpha = j.at("alpha").get<double>();
  d.th_level = j.at("th_level").get<double>();
  const auto src = j.at("source").get<std::string>();
  if (src == "Automatic") d.source = ThresholdSource::Automatic;
  else if (src == "UserOverride") d.source = ThresholdSource::UserOverride;
  else throw Error(ErrorCode::CorruptData, "unknown threshold source '" + src + "'");
  return d;
}

ordered_json config_to_json(const PipelineConfig& cfg) {
  ordered_json j;
  j["axis"] = std::string(axis_name(cfg.axis));
  j["prominence_frac"] = cfg.prominence_frac;
  j["bracket_position"] = cfg.bracket_position;
  j["alpha_override"] = cfg.alpha_override ? ordered_json(*cfg.alpha_override) : ordered_json();
  j["se"] = cfg.se.to_string();
  j["median_window"] = cfg.median_window;
  j["enhance"] = cfg.enhance;
  j["enhance_se"] = cfg.enhance_se.to_string();
  j["binarize_epsilon"] = cfg.binarize_epsilon;
  j["min_band_area"] = cfg.min_band_area;
  j["connectivity"] = static_cast<int>(cfg.connectivity);
  if (cfg.roi) {
    j["roi"] = {{"x", cfg.roi->x}, {"y", cfg.roi->y}, {"width", cfg.roi->width},
                {"height", cfg.roi->height}};
  } else {
    j["roi"] = nullptr;
  }
  j["migration_axis"] = cfg.migration_axis == MigrationAxis::Vertical ? "vertical" : "horizontal";
  j["migration_origin"] = cfg.migration_origin;
  return j;
}

PipelineConfig config_from_json(const json& j, PipelineConfig base) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "configuration must be an object");
  for (const auto& [key, value] : j.items()) {
    std::string text;
    if (value.is_null()) {
      text = "none";
    } else if (value.is_boolean()) {
      text = value.get<bool>() ? "true" : "false";
    } else if (value.is_number_float()) {
      text = format_double(value.get<double>());
    } else if (value.is_number()) {
      text = value.dump();
    } else if (value.is_string()) {
      text = value.get<std::string>();
    } else if (key == "roi" && value.is_object()) {
      try {
        text = std::to_string(value.at("x").get<int>()) + "," +
               std::to_string(value.at("y").get<int>()) + "," +
               std::to_string(value.at("width").get<int>()) + "," +
               std::to_string(value.at("height").get<int>());
      } catch (const json::exception&) {
        throw Error(ErrorCode::InvalidArgument, "roi needs integer x, y, width, height");
      }
    } else {
      throw Error(ErrorCode::InvalidArgument, "unsupported value for " + key);
    }
    set_config_value(base, key, text);
  }
  base.validate();
  return base;
}

namespace {

ordered_json label_values(const std::vector<LabelValue>& items, const char* name) {
  ordered_json arr = ordered_json::array();
  for (const auto& lv : items) arr.push_back({{"label", lv.label}, {name, lv.value}});
  return arr;
}

std::vector<LabelValue> label_values_from(const json& arr, const char* name) {
  std::vector<LabelValue> out;
  for (const auto& item : arr) {
    out.push_back({item.at("label").get<std::int32_t>(), item.at(name).get<double>()});
  }
  return out;
}

}  // namespace

ordered_json report_to_json(const BandReport& rep) {
  ordered_json j;
  j["source"] = {{"path", rep.source.path}, {"sha256", rep.source.sha256}};
  j["config"] = config_to_json(rep.config);
  j["decision"] = decision_to_json(rep.decision);
  ordered_json bands = ordered_json::array();
  for (const auto& b : rep.bands) bands.push_back(band_to_json(b));
  j["bands"] = std::move(bands);
  j["reference"] = rep.reference ? ordered_json(*rep.reference) : ordered_json();
  j["ratios"] = label_values(rep.ratios, "ratio");
  j["migrations"] = label_values(rep.migrations, "rel_migration");
  // Molecular-weight ladder calibration is reserved; always null for now.
  j["calibration"] = nullptr;
  return j;
}

BandReport report_from_json(const json& j) {
  try {
    BandReport rep;
    rep.source.path = j.at("source").at("path").get<std::string>();
    rep.source.sha256 = j.at("source").at("sha256").get<std::string>();
    rep.config = config_from_json(j.at("config"));
    rep.decision = decision_from_json(j.at("decision"));
    for (const auto& b : j.at("bands")) rep.bands.push_back(band_from_json(b));
    if (!j.at("reference").is_null()) rep.reference = j.at("reference").get<std::int32_t>();
    rep.ratios = label_values_from(j.at("ratios"), "ratio");
    rep.migrations = label_values_from(j.at("migrations"), "rel_migration");
    return rep;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptData, std::string("malformed report: ") + e.what());
  }
}

std::string report_to_text(const BandReport& rep) { return report_to_json(rep).dump(2) + "\n"; }

BandReport parse_report_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptData, std::string("report is not valid JSON: ") + e.what());
  }
  return report_from_json(j);
}

std::string bands_table_csv(const BandReport& rep) {
  std::string out = "label,area,centroid_x,centroid_y,mean_intensity,ratio,rel_migration\n";
  auto lookup = [](const std::vector<LabelValue>& items, std::int32_t label) -> std::string {
    for (const auto& lv : items) {
      if (lv.label == label) return format_double(lv.value);
    }
    return {};
  };
  for (const auto& b : rep.bands) {
    out += std::to_string(b.label) + "," + std::to_string(b.area) + "," +
           format_double(b.centroid_x) + "," + format_double(b.centroid_y) + "," +
           format_double(b.mean_intensity) + "," + lookup(rep.ratios, b.label) + "," +
           lookup(rep.migrations, b.label) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Overlay

namespace {

// 3x5 digit glyphs, one row per entry, bit 2 = leftmost column.
constexpr std::uint8_t kDigits[10][5] = {
    {7, 5, 5, 5, 7}, {2, 6, 2, 2, 7}, {7, 1, 7, 4, 7}, {7, 1, 7, 1, 7}, {5, 5, 7, 1, 1},
    {7, 4, 7, 1, 7}, {7, 4, 7, 5, 7}, {7, 1, 1, 1, 1}, {7, 5, 7, 5, 7}, {7, 5, 7, 1, 7},
};

struct Colour {
  std::uint8_t r, g, b;
};

void draw_text(RgbImage& img, int x, int y, const std::string& text, Colour c, int scale) {
  for (char ch : text) {
    if (ch < '0' || ch > '9') continue;
    const auto& glyph = kDigits[ch - '0'];
    for (int gy = 0; gy < 5; ++gy) {
      for (int gx = 0; gx < 3; ++gx) {
        if (!(glyph[gy] & (4 >> gx))) continue;
        for (int sy = 0; sy < scale; ++sy) {
          for (int sx = 0; sx < scale; ++sx) {
            img.set(x + gx * scale + sx, y + gy * scale + sy, c.r, c.g, c.b);
          }
        }
      }
    }
    x += 4 * scale;
  }
}

void draw_box(RgbImage& img, const BoundingBox& box, Colour c) {
  const int x0 = box.x_min - 1, x1 = box.x_max + 1, y0 = box.y_min - 1, y1 = box.y_max + 1;
  for (int x = x0; x <= x1; ++x) {
    img.set(x, y0, c.r, c.g, c.b);
    img.set(x, y1, c.r, c.g, c.b);
  }
  for (int y = y0; y <= y1; ++y) {
    img.set(x0, y, c.r, c.g, c.b);
    img.set(x1, y, c.r, c.g, c.b);
  }
}

}  // namespace

RgbImage render_overlay(const GrayImage& base, const BandReport& rep) {
  RgbImage out(base.width(), base.height());
  const double scale = 255.0 / base.max_range();
  for (int y = 0; y < base.height(); ++y) {
    for (int x = 0; x < base.width(); ++x) {
      const auto g = static_cast<std::uint8_t>(quantize_sample(base.at(x, y) * scale, 255.0));
      out.set(x, y, g, g, g);
    }
  }
  constexpr Colour kBand{255, 64, 64};
  constexpr Colour kReference{64, 160, 255};
  for (const auto& b : rep.bands) {
    const Colour c = rep.reference && *rep.reference == b.label ? kReference : kBand;
    draw_box(out, b.bbox, c);
    const int text_y = b.bbox.y_min - 12 >= 0 ? b.bbox.y_min - 12 : b.bbox.y_max + 3;
    draw_text(out, b.bbox.x_min, text_y, std::to_string(b.label), c, 2);
  }
  return out;
}

WrittenFiles write_report(const BandReport& rep, const fs::path& dir, const GrayImage& overlay_base,
                          ReportFormat format) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());

  WrittenFiles files;
  auto write_text = [](const fs::path& p, const std::string& text) {
    write_file_bytes(p, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  };
  if (format != ReportFormat::Table) {
    files.report = dir / "report.json";
    write_text(*files.report, report_to_text(rep));
  }
  if (format != ReportFormat::Report) {
    files.table = dir / "bands.csv";
    write_text(*files.table, bands_table_csv(rep));
  }
  files.overlay = dir / "overlay.png";
  save_rgb_png(render_overlay(overlay_base, rep), files.overlay);
  return files;
}

BandReport read_report(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  return parse_report_text(std::string(bytes.begin(), bytes.end()));
}

}  // namespace gelscan
