#include "gelscan/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>

#include "gelscan/error.hpp"

namespace gelscan {

namespace fs = std::filesystem;

std::uint32_t quantize_sample(double value, double max_range) noexcept {
  const double q = std::floor(value + 0.5);
  return static_cast<std::uint32_t>(std::clamp(q, 0.0, max_range));
}

// ---------------------------------------------------------------------------
// PGM

namespace {

class PgmHeaderReader {
 public:
  explicit PgmHeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  long next_int() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      throw Error(ErrorCode::CorruptData, "malformed PGM header");
    }
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > 1'000'000'000L) throw Error(ErrorCode::CorruptData, "PGM header value too large");
      ++pos_;
    }
    return v;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw Error(ErrorCode::CorruptData, "missing separator before PGM raster");
    }
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

GrayImage decode_pgm(std::span<const std::uint8_t> bytes) {
  PgmHeaderReader header(bytes);
  const long width = header.next_int();
  const long height = header.next_int();
  const long maxval = header.next_int();
  if (width < 1 || height < 1) throw Error(ErrorCode::CorruptData, "PGM has zero size");
  if (maxval != 255 && maxval != 65535) {
    throw Error(ErrorCode::UnsupportedFormat,
                "PGM maxval must be 255 or 65535, got " + std::to_string(maxval));
  }
  const int depth = maxval == 255 ? 8 : 16;
  const std::size_t offset = header.raster_offset();
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  const std::size_t sample_bytes = depth == 8 ? 1 : 2;
  if (bytes.size() - std::min(bytes.size(), offset) < count * sample_bytes) {
    throw Error(ErrorCode::CorruptData, "PGM raster is truncated");
  }
  std::vector<double> pixels(count);
  const std::uint8_t* p = bytes.data() + offset;
  for (std::size_t i = 0; i < count; ++i) {
    pixels[i] = depth == 8 ? p[i] : static_cast<double>((p[2 * i] << 8) | p[2 * i + 1]);
  }
  return GrayImage(static_cast<int>(width), static_cast<int>(height), std::move(pixels), depth);
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
  const std::string header = "P5\n" + std::to_string(img.width()) + " " +
                             std::to_string(img.height()) + "\n" +
                             (img.bit_depth() == 8 ? "255" : "65535") + "\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  const double top = img.max_range();
  out.reserve(out.size() + img.size() * (img.bit_depth() == 8 ? 1 : 2));
  for (double v : img.pixels()) {
    const std::uint32_t s = quantize_sample(v, top);
    if (img.bit_depth() == 16) out.push_back(static_cast<std::uint8_t>(s >> 8));
    out.push_back(static_cast<std::uint8_t>(s & 0xff));
  }
  return out;
}

// ---------------------------------------------------------------------------
// PNG (libpng). Objects with non-trivial destructors are created outside the
// functions that call setjmp so that a longjmp never skips a destructor.

struct MemoryReader {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t n) {
  auto* src = static_cast<MemoryReader*>(png_get_io_ptr(png));
  if (src->bytes.size() - src->pos < n) png_error(png, "unexpected end of PNG data");
  std::memcpy(out, src->bytes.data() + src->pos, n);
  src->pos += n;
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t n) {
  auto* dst = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  dst->insert(dst->end(), data, data + n);
}

void png_flush_noop(png_structp) {}

void png_silent_warning(png_structp, png_const_charp) {}

struct PngHeader {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int bit_depth = 0;
  int color_type = 0;
};

// Returns false when libpng reported an error.
bool read_png_header(png_structp png, png_infop info, PngHeader* header) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_read_info(png, info);
  header->width = png_get_image_width(png, info);
  header->height = png_get_image_height(png, info);
  header->bit_depth = png_get_bit_depth(png, info);
  header->color_type = png_get_color_type(png, info);
  return true;
}

bool read_png_rows(png_structp png, png_infop info, png_bytepp rows) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_read_image(png, rows);
  png_read_end(png, info);
  return true;
}

struct PngReadHandle {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReadHandle() { png_destroy_read_struct(&png, info ? &info : nullptr, nullptr); }
};

GrayImage decode_png(std::span<const std::uint8_t> bytes) {
  PngReadHandle h;
  h.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_silent_warning);
  if (!h.png) throw Error(ErrorCode::IoFailure, "libpng initialisation failed");
  h.info = png_create_info_struct(h.png);
  if (!h.info) throw Error(ErrorCode::IoFailure, "libpng initialisation failed");

  MemoryReader reader{bytes, 0};
  png_set_read_fn(h.png, &reader, png_read_from_memory);

  PngHeader header;
  if (!read_png_header(h.png, h.info, &header)) {
    throw Error(ErrorCode::CorruptData, "malformed PNG header");
  }
  if (header.color_type != PNG_COLOR_TYPE_GRAY) {
    throw Error(ErrorCode::UnsupportedFormat,
                "only single-channel grayscale PNG is supported (color type " +
                    std::to_string(header.color_type) + ")");
  }
  if (header.bit_depth != 8 && header.bit_depth != 16) {
    throw Error(ErrorCode::UnsupportedFormat,
                "PNG bit depth must be 8 or 16, got " + std::to_string(header.bit_depth));
  }
  if (header.width == 0 || header.height == 0 || header.width > (1u << 20) ||
      header.height > (1u << 20)) {
    throw Error(ErrorCode::CorruptData, "implausible PNG dimensions");
  }
  const std::size_t stride = header.width * (header.bit_depth == 16 ? 2u : 1u);
  std::vector<std::uint8_t> raster(stride * header.height);
  std::vector<png_bytep> rows(header.height);
  for (png_uint_32 y = 0; y < header.height; ++y) rows[y] = raster.data() + y * stride;
  if (!read_png_rows(h.png, h.info, rows.data())) {
    throw Error(ErrorCode::CorruptData, "PNG image data is corrupt or truncated");
  }

  const std::size_t count = static_cast<std::size_t>(header.width) * header.height;
  std::vector<double> pixels(count);
  for (std::size_t i = 0; i < count; ++i) {
    pixels[i] = header.bit_depth == 8
                    ? raster[i]
                    : static_cast<double>((raster[2 * i] << 8) | raster[2 * i + 1]);
  }
  return GrayImage(static_cast<int>(header.width), static_cast<int>(header.height),
                   std::move(pixels), header.bit_depth);
}

struct PngWriteHandle {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWriteHandle() { png_destroy_write_struct(&png, info ? &info : nullptr); }
};

bool write_png_rows(png_structp png, png_infop info, png_uint_32 w, png_uint_32 h, int depth,
                    int color_type, png_bytepp rows) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_set_IHDR(png, info, w, h, depth, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows);
  png_write_end(png, nullptr);
  return true;
}

std::vector<std::uint8_t> encode_png_raster(int width, int height, int depth, int color_type,
                                            std::vector<std::uint8_t>& raster,
                                            std::size_t stride) {
  PngWriteHandle h;
  h.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_silent_warning);
  if (!h.png) throw Error(ErrorCode::IoFailure, "libpng initialisation failed");
  h.info = png_create_info_struct(h.png);
  if (!h.info) throw Error(ErrorCode::IoFailure, "libpng initialisation failed");

  std::vector<std::uint8_t> out;
  png_set_write_fn(h.png, &out, png_write_to_vector, png_flush_noop);
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) rows[static_cast<std::size_t>(y)] = raster.data() + y * stride;
  if (!write_png_rows(h.png, h.info, static_cast<png_uint_32>(width),
                      static_cast<png_uint_32>(height), depth, color_type, rows.data())) {
    throw Error(ErrorCode::IoFailure, "PNG encoding failed");
  }
  return out;
}

std::vector<std::uint8_t> encode_png(const GrayImage& img) {
  const bool wide = img.bit_depth() == 16;
  const std::size_t stride = static_cast<std::size_t>(img.width()) * (wide ? 2 : 1);
  std::vector<std::uint8_t> raster;
  raster.reserve(stride * static_cast<std::size_t>(img.height()));
  const double top = img.max_range();
  for (double v : img.pixels()) {
    const std::uint32_t s = quantize_sample(v, top);
    if (wide) raster.push_back(static_cast<std::uint8_t>(s >> 8));
    raster.push_back(static_cast<std::uint8_t>(s & 0xff));
  }
  return encode_png_raster(img.width(), img.height(), img.bit_depth(), PNG_COLOR_TYPE_GRAY,
                           raster, stride);
}

bool starts_with(std::span<const std::uint8_t> bytes, std::string_view magic) {
  return bytes.size() >= magic.size() &&
         std::equal(magic.begin(), magic.end(), bytes.begin(),
                    [](char a, std::uint8_t b) { return static_cast<std::uint8_t>(a) == b; });
}

}  // namespace

GrayImage decode_image(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) throw Error(ErrorCode::CorruptData, "empty image data");
  if (starts_with(bytes, "P5")) return decode_pgm(bytes);
  if (starts_with(bytes, "\x89PNG\r\n\x1a\n")) return decode_png(bytes);
  if (starts_with(bytes, "P6") || starts_with(bytes, "P3")) {
    throw Error(ErrorCode::UnsupportedFormat, "color portable pixmap is not accepted");
  }
  throw Error(ErrorCode::UnsupportedFormat, "unrecognised image container");
}

GrayImage load_image(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  return decode_image(bytes);
}

std::vector<std::uint8_t> encode_image(const GrayImage& img, ImageFormat format) {
  return format == ImageFormat::Pgm ? encode_pgm(img) : encode_png(img);
}

void save_image(const GrayImage& img, const fs::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  write_file_bytes(path, encode_image(img, ext == ".pgm" ? ImageFormat::Pgm : ImageFormat::Png));
}

RgbImage::RgbImage(int w, int h)
    : width(w), height(h), data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, 0) {}

void RgbImage::set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
  if (x < 0 || y < 0 || x >= width || y >= height) return;
  const std::size_t i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                         static_cast<std::size_t>(x)) * 3;
  data[i] = r;
  data[i + 1] = g;
  data[i + 2] = b;
}

std::vector<std::uint8_t> encode_rgb_png(const RgbImage& img) {
  auto raster = img.data;
  return encode_png_raster(img.width, img.height, 8, PNG_COLOR_TYPE_RGB, raster,
                           static_cast<std::size_t>(img.width) * 3);
}

void save_rgb_png(const RgbImage& img, const fs::path& path) {
  write_file_bytes(path, encode_rgb_png(img));
}

std::vector<std::uint8_t> read_file_bytes(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw Error(ErrorCode::FileNotFound, path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

void write_file_bytes(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "short write to " + path.string());
}

}  // namespace gelscan
