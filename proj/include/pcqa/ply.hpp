#pragma once

#include <string>

#include "pcqa/cloud.hpp"

namespace pcqa {

enum class PlyFormat { kAscii, kBinaryLittleEndian };

// Reads a PLY vertex cloud. The vertex element must carry x,y,z coordinates
// (float32/float64/int32/uint32) and red,green,blue (uint8); nx,ny,nz float
// normals are picked up when present, renormalized to unit length. Other
// properties and elements are skipped. Coordinates are returned as stored
// (precision == 0); run voxelize() before using the cloud in a metric.
PointCloud load_ply(const std::string& path);

// Writes the cloud back out. Voxelized clouds store coordinates as int32,
// raw clouds as float64; either way load_ply(write_ply(c)) reproduces the
// positions and colors bit-exactly.
void write_ply(const PointCloud& cloud, const std::string& path,
               PlyFormat format = PlyFormat::kBinaryLittleEndian);

}  // namespace pcqa
