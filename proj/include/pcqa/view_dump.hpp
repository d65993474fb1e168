#pragma once

#include <string>

#include "pcqa/image.hpp"

namespace pcqa {

// 8-bit RGB PNG.
void write_png(const RgbImage& image, const std::string& path);

// Binary PGM (P5) with occupied pixels at 255.
void write_pgm(const MaskImage& mask, const std::string& path);

}  // namespace pcqa
