#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "synthpipe/core/mat.hpp"

namespace synthpipe {

/// 8-bit grayscale read; RGB/RGBA/palette inputs are converted to luma.
Mat<std::uint8_t> read_png_gray8(const std::filesystem::path& path);

void write_png_gray8(const std::filesystem::path& path, const Mat<std::uint8_t>& img);

/// Interleaved RGB rows, 3 bytes per pixel.
void write_png_rgb8(const std::filesystem::path& path, int height, int width,
                    const std::vector<std::uint8_t>& rgb);

/// Gray PNG as floats in [0, 1].
MatF read_png_gray_f32(const std::filesystem::path& path);

/// Clamps to [0, 1], quantizes to 8 bits.
void write_png_gray_f32(const std::filesystem::path& path, const MatF& img);

}  // namespace synthpipe
