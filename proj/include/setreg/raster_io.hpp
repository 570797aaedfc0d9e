#pragma once

#include <filesystem>

#include "setreg/image.hpp"

namespace setreg {

/// Decodes a PNG (gray or RGB, 8 or 16 bit) or a PGM (P2/P5, maxval up to 65535).
/// The format is chosen from the file signature, not the extension.
/// Throws FormatError naming the path on any decode failure.
RawRaster read_raster(const std::filesystem::path& path);

/// read_raster followed by to_grayscale.
ImageGrid load_grayscale(const std::filesystem::path& path);

/// True for file names ending in .png or .pgm (case-insensitive).
bool is_raster_filename(const std::filesystem::path& path);

/// Writes a single-channel 16-bit PNG. Values are clamped to [0, 1] and quantized.
void write_png16(const std::filesystem::path& path, const ImageGrid& img);

/// Writes an 8-bit binary PGM with values scaled so the grid maximum maps to 255.
/// An all-zero grid is written as black.
void write_pgm_normalized(const std::filesystem::path& path, const ImageGrid& img);

}  // namespace setreg
