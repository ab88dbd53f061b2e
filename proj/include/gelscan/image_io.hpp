#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gelscan/image.hpp"

namespace gelscan {

enum class ImageFormat { Pgm, Png };

/// Decodes binary PGM ("P5", maxval 255 or 65535) or 8/16-bit grayscale PNG.
/// Color, paletted, gray+alpha and sub-byte rasters are rejected with
/// UnsupportedFormat; truncated or malformed payloads raise CorruptData.
GrayImage decode_image(std::span<const std::uint8_t> bytes);

GrayImage load_image(const std::filesystem::path& path);

/// Pixel values are rounded half-up and clamped to [0, max_range] first.
std::vector<std::uint8_t> encode_image(const GrayImage& img, ImageFormat format);

/// Format follows the extension: ".pgm" writes PGM, anything else PNG.
void save_image(const GrayImage& img, const std::filesystem::path& path);

/// The integer sample written for a pixel value.
std::uint32_t quantize_sample(double value, double max_range) noexcept;

/// 8-bit-per-channel RGB raster used for annotated overlays.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // row-major, 3 bytes per pixel

  RgbImage(int w, int h);
  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept;
};

std::vector<std::uint8_t> encode_rgb_png(const RgbImage& img);
void save_rgb_png(const RgbImage& img, const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace gelscan
