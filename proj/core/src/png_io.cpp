#include "uavpheno/png_io.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "uavpheno/error.hpp"

namespace uavpheno {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr file(std::fopen(path.c_str(), mode));
  if (!file) {
    throw InputError("cannot open '" + path.string() + "'");
  }
  return file;
}

// libpng reports errors through longjmp; the message is stashed here so the
// caller can rethrow it as a C++ exception after the jump.
struct ErrorSink {
  std::string message;
};

void on_png_error(png_structp png, png_const_charp msg) {
  auto* sink = static_cast<ErrorSink*>(png_get_error_ptr(png));
  if (sink != nullptr) {
    sink->message = msg;
  }
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

struct Decoded {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<std::uint8_t> bytes;
};

// Decodes to either 8-bit gray/RGB or 16-bit gray (big-endian bytes as stored).
Decoded decode(const std::filesystem::path& path) {
  FilePtr file = open_file(path, "rb");

  png_byte signature[8];
  if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
    throw InputError("'" + path.string() + "' is not a PNG file");
  }

  ErrorSink sink;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &sink, on_png_error,
                                           on_png_warning);
  if (png == nullptr) {
    throw InputError("libpng initialisation failed");
  }
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw InputError("libpng initialisation failed");
  }

  Decoded out;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw InputError("PNG decode error in '" + path.string() + "': " + sink.message);
  }

  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const png_byte color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);

  if (color == PNG_COLOR_TYPE_PALETTE) {
    png_set_palette_to_rgb(png);
  }
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) {
    png_set_tRNS_to_alpha(png);
  }
  if (color & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS)) {
    png_set_strip_alpha(png);
  }
  png_read_update_info(png, info);

  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = png_get_channels(png, info);
  out.bit_depth = png_get_bit_depth(png, info);

  const std::size_t stride = png_get_rowbytes(png, info);
  out.bytes.resize(stride * static_cast<std::size_t>(out.height));
  rows.resize(static_cast<std::size_t>(out.height));
  for (int i = 0; i < out.height; ++i) {
    rows[static_cast<std::size_t>(i)] = out.bytes.data() + stride * static_cast<std::size_t>(i);
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

void encode(const std::filesystem::path& path, int width, int height, int color_type,
            int bit_depth, const std::uint8_t* data, std::size_t stride) {
  FilePtr file = open_file(path, "wb");

  ErrorSink sink;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &sink, on_png_error,
                                            on_png_warning);
  if (png == nullptr) {
    throw InputError("libpng initialisation failed");
  }
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw InputError("libpng initialisation failed");
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw InputError("PNG encode error for '" + path.string() + "': " + sink.message);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int i = 0; i < height; ++i) {
    rows[static_cast<std::size_t>(i)] =
        const_cast<png_bytep>(data + stride * static_cast<std::size_t>(i));
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(file.get()) != 0) {
    throw InputError("write failed for '" + path.string() + "'");
  }
}

}  // namespace

RasterImage load_image(const std::filesystem::path& path) {
  Decoded d = decode(path);
  if (d.bit_depth != 8) {
    throw InputError("'" + path.string() + "': unsupported bit depth " +
                     std::to_string(d.bit_depth) + " (expected 8)");
  }
  if (d.channels != 1 && d.channels != 3) {
    throw InputError("'" + path.string() + "': unsupported channel count " +
                     std::to_string(d.channels));
  }
  return RasterImage(d.width, d.height, d.channels, std::move(d.bytes));
}

void save_image(const RasterImage& image, const std::filesystem::path& path) {
  if (image.empty()) {
    throw InputError("cannot save an empty image");
  }
  const int color = image.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
  encode(path, image.width(), image.height(), color, 8, image.samples().data(),
         static_cast<std::size_t>(image.width()) * static_cast<std::size_t>(image.channels()));
}

GrayImage16 load_png16(const std::filesystem::path& path) {
  Decoded d = decode(path);
  if (d.bit_depth != 16 || d.channels != 1) {
    throw InputError("'" + path.string() + "': expected a 16-bit grayscale PNG");
  }
  GrayImage16 out;
  out.width = d.width;
  out.height = d.height;
  out.samples.resize(static_cast<std::size_t>(d.width) * static_cast<std::size_t>(d.height));
  for (std::size_t k = 0; k < out.samples.size(); ++k) {
    out.samples[k] = static_cast<std::uint16_t>((d.bytes[2 * k] << 8) | d.bytes[2 * k + 1]);
  }
  return out;
}

void save_png16(const GrayImage16& image, const std::filesystem::path& path) {
  const std::size_t n = static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height);
  if (image.width < 1 || image.height < 1 || image.samples.size() != n) {
    throw InputError("malformed 16-bit image");
  }
  std::vector<std::uint8_t> bytes(2 * n);
  for (std::size_t k = 0; k < n; ++k) {
    bytes[2 * k] = static_cast<std::uint8_t>(image.samples[k] >> 8);
    bytes[2 * k + 1] = static_cast<std::uint8_t>(image.samples[k] & 0xFF);
  }
  encode(path, image.width, image.height, PNG_COLOR_TYPE_GRAY, 16, bytes.data(),
         2 * static_cast<std::size_t>(image.width));
}

}  // namespace uavpheno
