#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "carpetlab/raster.hpp"

namespace carpetlab {

using Bytes = std::vector<std::uint8_t>;

/// Binary P5, one byte per pixel: 0 empty, 255 occupied.
Bytes encode_pgm(const Raster& raster);

/// 8-bit grayscale PNG with the same 0/255 convention.
Bytes encode_png(const Raster& raster);

/// 8-bit RGB PNG from interleaved rows (3 * width * height bytes).
Bytes encode_png_rgb(int width, int height, const std::vector<std::uint8_t>& rgb);

/// 8-bit grayscale image from row-major pixels as "png" or "pgm" (P5).
Bytes encode_gray(int width, int height, const std::vector<std::uint8_t>& gray, const std::string& format);

/// Decodes a PGM (P5/P2) or PNG; pixels >= 128 (or 128 of maxval) are occupied.
/// The viewport is [0, 1] x [0, height / width]. Throws DataError.
Raster decode_raster(const Bytes& data);

/// Reads a raster file; throws DataError("cannot read input: ...") when the
/// file is missing or undecodable.
Raster read_raster(const std::filesystem::path& path);

void write_bytes(const std::filesystem::path& path, const Bytes& data);

/// "png" or "pgm" encoding of a raster.
Bytes encode_raster(const Raster& raster, const std::string& format);

}  // namespace carpetlab
