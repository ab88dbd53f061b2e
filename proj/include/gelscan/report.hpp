#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "gelscan/bands.hpp"
#include "gelscan/image_io.hpp"
#include "gelscan/pipeline.hpp"

namespace gelscan {

/// area_n / (area_ref + area_n). Throws ZeroArea if either area is < 1.
double ratio_size(double area_n, double area_ref);

/// Distance of the band centroid from `origin` along `axis`, divided by the
/// same distance for the reference. The reference maps to exactly 1.
/// Throws ZeroMigration when the reference sits on the origin.
double relative_migration(const Band& band, const Band& ref, MigrationAxis axis, double origin);

struct SourceInfo {
  std::string path;
  std::string sha256;  // lowercase hex of the input file bytes

  friend bool operator==(const SourceInfo&, const SourceInfo&) = default;
};

struct LabelValue {
  std::int32_t label = 0;
  double value = 0.0;

  friend bool operator==(const LabelValue&, const LabelValue&) = default;
};

/// Persisted result of one analysis run.
struct BandReport {
  SourceInfo source;
  PipelineConfig config;
  ThresholdDecision decision;
  std::vector<Band> bands;
  std::optional<std::int32_t> reference;
  std::vector<LabelValue> ratios;      // empty without a reference
  std::vector<LabelValue> migrations;  // empty without a reference

  friend bool operator==(const BandReport&, const BandReport&) = default;
};

/// Rounds to 6 significant digits (the precision reports are written with).
double round_sig6(double v);

/// Builds the report for a finished run. Real-valued fields are rounded to
/// 6 significant digits so that the written form reloads exactly. With a
/// reference label, ratios and migrations are filled for every band.
/// Throws UnknownBand when the reference is not among the bands.
BandReport make_report(const SourceInfo& source, const PipelineConfig& cfg,
                       const PipelineResult& result, std::optional<std::int32_t> reference = {});

std::string sha256_hex(std::span<const std::uint8_t> bytes);

// JSON mapping. Field names follow the C++ members.
nlohmann::ordered_json band_to_json(const Band& band);
Band band_from_json(const nlohmann::json& j);
nlohmann::ordered_json decision_to_json(const ThresholdDecision& d);
ThresholdDecision decision_from_json(const nlohmann::json& j);
nlohmann::ordered_json config_to_json(const PipelineConfig& cfg);
/// Applies the keys present in `j` on top of `base`; unknown keys are errors.
PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig base = {});
nlohmann::ordered_json report_to_json(const BandReport& rep);
BandReport report_from_json(const nlohmann::json& j);

/// Serialized report document (2-space indented JSON, trailing newline).
std::string report_to_text(const BandReport& rep);
BandReport parse_report_text(const std::string& text);

std::string bands_table_csv(const BandReport& rep);

/// Grayscale background with band boxes and label numbers; the reference
/// band, if any, is drawn in a different colour.
RgbImage render_overlay(const GrayImage& base, const BandReport& rep);

enum class ReportFormat { Report, Table, Both };

struct WrittenFiles {
  std::optional<std::filesystem::path> report;
  std::optional<std::filesystem::path> table;
  std::filesystem::path overlay;
};

/// Writes report.json and/or bands.csv plus overlay.png into `dir`
/// (created if missing). Throws IoFailure.
WrittenFiles write_report(const BandReport& rep, const std::filesystem::path& dir,
                          const GrayImage& overlay_base, ReportFormat format = ReportFormat::Both);

BandReport read_report(const std::filesystem::path& path);

}  // namespace gelscan
