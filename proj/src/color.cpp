#include "pointpca/color.hpp"

#include <cmath>
#include <stdexcept>

namespace pointpca {

ColorSpace color_space_from_string(const std::string& name) {
  if (name == "y" || name == "Y") return ColorSpace::Y;
  if (name == "ycbcr" || name == "YCbCr") return ColorSpace::YCbCr;
  if (name == "rgb" || name == "RGB") return ColorSpace::RGB;
  if (name == "cielab" || name == "CIELAB") return ColorSpace::CIELAB;
  throw std::invalid_argument("unknown color space '" + name + "'");
}

std::string to_string(ColorSpace space) {
  switch (space) {
    case ColorSpace::Y:
      return "y";
    case ColorSpace::YCbCr:
      return "ycbcr";
    case ColorSpace::RGB:
      return "rgb";
    case ColorSpace::CIELAB:
      return "cielab";
  }
  return "?";
}

namespace {

std::array<double, 3> rgb_to_ycbcr(const Vec3& c) {
  // BT.709 matrix, input and output on the 0-255 scale, no clamping.
  const double y = 0.2126 * c.x + 0.7152 * c.y + 0.0722 * c.z;
  const double cb = -0.1146 * c.x - 0.3854 * c.y + 0.5000 * c.z + 128.0;
  // BT.709 rows sum to 1/0/0 so neutral grays map to (v, 128, 128).
  const double cr = 0.5000 * c.x - 0.4542 * c.y - 0.0458 * c.z + 128.0;
  return {y, cb, cr};
}

double srgb_to_linear(double u) {
  return u <= 0.04045 ? u / 12.92 : std::pow((u + 0.055) / 1.055, 2.4);
}

std::array<double, 3> rgb_to_cielab(const Vec3& c) {
  const double r = srgb_to_linear(c.x / 255.0);
  const double g = srgb_to_linear(c.y / 255.0);
  const double b = srgb_to_linear(c.z / 255.0);
  // sRGB -> XYZ (D65)
  const double xn = 0.95047, yn = 1.0, zn = 1.08883;
  const double x = (0.4124564 * r + 0.3575761 * g + 0.1804375 * b) / xn;
  const double y = (0.2126729 * r + 0.7151522 * g + 0.0721750 * b) / yn;
  const double z = (0.0193339 * r + 0.1191920 * g + 0.9503041 * b) / zn;
  auto f = [](double t) {
    constexpr double d = 6.0 / 29.0;
    return t > d * d * d ? std::cbrt(t) : t / (3.0 * d * d) + 4.0 / 29.0;
  };
  const double fx = f(x), fy = f(y), fz = f(z);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

void check_range(const Vec3& rgb) {
  for (int a = 0; a < 3; ++a) {
    if (!(rgb[a] >= 0.0 && rgb[a] <= 255.0)) {
      throw std::invalid_argument("convert_color: channel out of [0,255]");
    }
  }
}

}  // namespace

ConvertedColor convert_color(const Vec3& rgb, ColorSpace space) {
  check_range(rgb);
  switch (space) {
    case ColorSpace::Y:
      return {{rgb_to_ycbcr(rgb)[0], 0.0, 0.0}, 1};
    case ColorSpace::YCbCr:
      return {rgb_to_ycbcr(rgb), 3};
    case ColorSpace::RGB:
      return {{rgb.x, rgb.y, rgb.z}, 3};
    case ColorSpace::CIELAB:
      return {rgb_to_cielab(rgb), 3};
  }
  throw std::logic_error("convert_color: bad space");
}

double textural_descriptor(const Vec3& rgb, ColorSpace space) {
  return convert_color(rgb, space).channels[0];
}

}  // namespace pointpca
