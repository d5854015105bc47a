#pragma once

#include <string>

#include "pslam/image.hpp"

namespace pslam {

struct PngError;

/// 8-bit gray/palette/RGB/RGBA or 16-bit gray PNG, reduced to luma in [0, 1].
FloatImage read_intensity_png(const std::string& path);

/// 16-bit grayscale PNG holding millimeters; returns meters, 0 = invalid.
FloatImage read_depth_png(const std::string& path);

/// 8-bit grayscale PNG (masks, label dumps).
ByteImage read_gray8_png(const std::string& path);

void write_gray8_png(const std::string& path, const ByteImage& img);

/// Writes meters as 16-bit millimeters (rounded, clamped to 65535).
void write_depth16_png(const std::string& path, const FloatImage& depth_m);

/// Raw 16-bit grayscale access, used where exactness matters more than units.
Image<uint16_t> read_gray16_png(const std::string& path);
void write_gray16_png(const std::string& path, const Image<uint16_t>& img);

}  // namespace pslam
