#pragma once

#include <filesystem>

#include "uavpheno/raster.hpp"

namespace uavpheno {

/// Loads an 8-bit grayscale or RGB PNG. Palette and gray+alpha/RGBA inputs
/// are expanded/stripped to 1 or 3 channels. 16-bit files are rejected;
/// use load_png16 for those. Throws InputError on any failure.
RasterImage load_image(const std::filesystem::path& path);

/// Writes an 8-bit grayscale (1 channel) or RGB (3 channel) PNG.
void save_image(const RasterImage& image, const std::filesystem::path& path);

GrayImage16 load_png16(const std::filesystem::path& path);
void save_png16(const GrayImage16& image, const std::filesystem::path& path);

}  // namespace uavpheno
