#include "gelscan/config_file.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "gelscan/error.hpp"
#include "gelscan/image_io.hpp"

namespace gelscan {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw Error(ErrorCode::InvalidArgument,
              "invalid value '" + std::string(value) + "' for " + std::string(key));
}

double parse_double(std::string_view key, std::string_view value) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size()) bad_value(key, value);
  return v;
}

long long parse_int(std::string_view key, std::string_view value) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size()) bad_value(key, value);
  return v;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad_value(key, value);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "axis",          "prominence_frac",  "bracket_position", "alpha_override",
      "se",            "median_window",    "enhance",          "enhance_se",
      "binarize_epsilon", "min_band_area", "connectivity",     "roi",
      "migration_axis", "migration_origin"};
  return keys;
}

void set_config_value(PipelineConfig& cfg, std::string_view key, std::string_view raw) {
  const std::string_view value = trim(raw);
  if (key == "axis") {
    if (value == "cols" || value == "columns") cfg.axis = ProfileAxis::AcrossColumns;
    else if (value == "rows") cfg.axis = ProfileAxis::AcrossRows;
    else bad_value(key, value);
  } else if (key == "prominence_frac") {
    cfg.prominence_frac = parse_double(key, value);
  } else if (key == "bracket_position") {
    cfg.bracket_position = parse_double(key, value);
  } else if (key == "alpha_override") {
    if (value == "none" || value.empty()) cfg.alpha_override.reset();
    else cfg.alpha_override = parse_double(key, value);
  } else if (key == "se") {
    cfg.se = StructuringElement::parse(std::string(value));
  } else if (key == "median_window") {
    cfg.median_window = static_cast<int>(parse_int(key, value));
  } else if (key == "enhance") {
    cfg.enhance = parse_bool(key, value);
  } else if (key == "enhance_se") {
    cfg.enhance_se = StructuringElement::parse(std::string(value));
  } else if (key == "binarize_epsilon") {
    cfg.binarize_epsilon = parse_double(key, value);
  } else if (key == "min_band_area") {
    cfg.min_band_area = parse_int(key, value);
  } else if (key == "connectivity") {
    const auto c = parse_int(key, value);
    if (c == 4) cfg.connectivity = Connectivity::Four;
    else if (c == 8) cfg.connectivity = Connectivity::Eight;
    else bad_value(key, value);
  } else if (key == "roi") {
    if (value == "none" || value.empty()) {
      cfg.roi.reset();
    } else {
      long long parts[4];
      std::size_t start = 0;
      for (int i = 0; i < 4; ++i) {
        const auto comma = value.find(',', start);
        if ((i < 3) == (comma == std::string_view::npos)) bad_value(key, value);
        parts[i] = parse_int(key, trim(value.substr(start, comma - start)));
        start = comma + 1;
      }
      cfg.roi = Roi{static_cast<int>(parts[0]), static_cast<int>(parts[1]),
                    static_cast<int>(parts[2]), static_cast<int>(parts[3])};
    }
  } else if (key == "migration_axis") {
    if (value == "vertical") cfg.migration_axis = MigrationAxis::Vertical;
    else if (value == "horizontal") cfg.migration_axis = MigrationAxis::Horizontal;
    else bad_value(key, value);
  } else if (key == "migration_origin") {
    cfg.migration_origin = parse_double(key, value);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown configuration key '" + std::string(key) + "'");
  }
}

std::string get_config_value(const PipelineConfig& cfg, std::string_view key) {
  if (key == "axis") return std::string(axis_name(cfg.axis));
  if (key == "prominence_frac") return format_double(cfg.prominence_frac);
  if (key == "bracket_position") return format_double(cfg.bracket_position);
  if (key == "alpha_override") return cfg.alpha_override ? format_double(*cfg.alpha_override) : "none";
  if (key == "se") return cfg.se.to_string();
  if (key == "median_window") return std::to_string(cfg.median_window);
  if (key == "enhance") return cfg.enhance ? "true" : "false";
  if (key == "enhance_se") return cfg.enhance_se.to_string();
  if (key == "binarize_epsilon") return format_double(cfg.binarize_epsilon);
  if (key == "min_band_area") return std::to_string(cfg.min_band_area);
  if (key == "connectivity") return std::to_string(static_cast<int>(cfg.connectivity));
  if (key == "roi") {
    if (!cfg.roi) return "none";
    return std::to_string(cfg.roi->x) + "," + std::to_string(cfg.roi->y) + "," +
           std::to_string(cfg.roi->width) + "," + std::to_string(cfg.roi->height);
  }
  if (key == "migration_axis") {
    return cfg.migration_axis == MigrationAxis::Vertical ? "vertical" : "horizontal";
  }
  if (key == "migration_origin") return format_double(cfg.migration_origin);
  throw Error(ErrorCode::InvalidArgument, "unknown configuration key '" + std::string(key) + "'");
}

std::string to_config_text(const PipelineConfig& cfg) {
  std::string out = "# gelscan pipeline configuration\n";
  for (const auto& key : config_keys()) out += key + " = " + get_config_value(cfg, key) + "\n";
  return out;
}

PipelineConfig parse_config_text(std::string_view text, PipelineConfig base) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::InvalidArgument,
                  "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      set_config_value(base, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.detail());
    }
  }
  base.validate();
  return base;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return parse_config_text(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

void save_config(const PipelineConfig& cfg, const std::filesystem::path& path) {
  const std::string text = to_config_text(cfg);
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace gelscan
