#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "gelscan/pipeline.hpp"

namespace gelscan {

// Plain-text pipeline configuration: one "key = value" per line, '#' starts
// a comment, unknown keys are errors. Keys are the PipelineConfig field
// names; see docs/config.md for the value syntax.

/// Sets one field from its textual form. Throws InvalidArgument.
void set_config_value(PipelineConfig& cfg, std::string_view key, std::string_view value);

/// Textual form of one field, as written by to_config_text.
std::string get_config_value(const PipelineConfig& cfg, std::string_view key);

/// Keys in file order.
const std::vector<std::string>& config_keys();

/// Every key, with a header comment. parse_config_text inverts it exactly.
std::string to_config_text(const PipelineConfig& cfg);

/// Starts from `base` and applies each line. Throws InvalidArgument with the
/// offending line number.
PipelineConfig parse_config_text(std::string_view text, PipelineConfig base = {});

PipelineConfig load_config(const std::filesystem::path& path);
void save_config(const PipelineConfig& cfg, const std::filesystem::path& path);

/// Shortest decimal that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace gelscan
