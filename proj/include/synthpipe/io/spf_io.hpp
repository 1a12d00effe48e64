#pragma once

#include <filesystem>

#include "synthpipe/core/mat.hpp"

namespace synthpipe {

// Preprocessed-frame binary: 16-byte header (magic "SPF1", u32 height,
// u32 width, u32 reserved, all little-endian) followed by float32
// row-major pixels.

void write_spf(const std::filesystem::path& path, const MatF& img);

MatF read_spf(const std::filesystem::path& path);

}  // namespace synthpipe
