#pragma once

#include <string>

#include "gateseed/imagecore/image.hpp"

namespace gateseed::imagecore {

// 8-bit PNG, gray or RGB. Palette/alpha/16-bit inputs are converted on read.
Image read_png(const std::string& path);
void write_png(const std::string& path, const Image& img);

// Binary PGM (P5, 1 channel) and PPM (P6, 3 channels), maxval 255.
Image read_pnm(const std::string& path);
void write_pnm(const std::string& path, const Image& img);

// Dispatches on the file extension (.png, .pgm, .ppm).
Image read_image(const std::string& path);
void write_image(const std::string& path, const Image& img);

}  // namespace gateseed::imagecore
