#pragma once

#include <string>

#include "pointpca/point_cloud.hpp"

namespace pointpca {

enum class PlyFormat { Ascii, BinaryLittleEndian };

/// Reads a PLY file with a vertex element carrying x,y,z (float32/float64)
/// and optionally red,green,blue (uint8). ASCII and binary-little-endian
/// formats are supported. Throws CloudError on malformed input.
PointCloud load_ply(const std::string& path);

/// Writes positions as float64 and, when present, colors as uint8
/// (rounded and clamped). The result reloads to an equal cloud via
/// load_ply, positions bit-exact.
void save_ply(const PointCloud& cloud, const std::string& path,
              PlyFormat format);

}  // namespace pointpca
