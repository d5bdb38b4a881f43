#pragma once

#include <array>
#include <string>

#include "pointpca/geometry.hpp"

namespace pointpca {

enum class ColorSpace { Y, YCbCr, RGB, CIELAB };

ColorSpace color_space_from_string(const std::string& name);
std::string to_string(ColorSpace space);

/// Converts an RGB triple (0-255 scale) into the selected color space.
/// Y and YCbCr use the BT.709 matrix with +128 chroma offsets, applied in
/// floating point without clamping. CIELAB goes through the D65 sRGB->XYZ
/// path. `count` is 1 for Y, 3 otherwise.
struct ConvertedColor {
  std::array<double, 3> channels;
  int count;
};

ConvertedColor convert_color(const Vec3& rgb, ColorSpace space);

/// The scalar textural descriptor: the first channel of the converted color
/// (luminance for Y/YCbCr, R for RGB, L* for CIELAB).
double textural_descriptor(const Vec3& rgb, ColorSpace space);

}  // namespace pointpca
