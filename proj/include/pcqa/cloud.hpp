#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace pcqa {

using Vec3 = std::array<double, 3>;
using Rgb8 = std::array<std::uint8_t, 3>;

inline constexpr int kMaxPrecision = 16;

// A colored point cloud. `precision` is the voxel grid depth in bits: once
// voxelize() has run, every coordinate is an integer in [0, 2^precision - 1],
// positions are unique, and the points are sorted by (x, y, z). precision == 0
// marks a raw cloud as read from file (coordinates may be floating point).
struct PointCloud {
  std::vector<Vec3> positions;
  std::vector<Rgb8> colors;
  std::vector<Vec3> normals;  // empty, or one unit vector per point
  int precision = 0;

  std::size_t size() const { return positions.size(); }
  bool empty() const { return positions.empty(); }
  bool voxelized() const { return precision > 0; }
  bool has_normals() const { return !normals.empty(); }
};

// Quantizes a cloud onto the 2^p integer grid. Coordinates that are already
// integers inside [0, 2^p - 1] are kept untouched (no rescaling); otherwise
// the cloud is min-max normalized into the precision cube with a single
// isotropic scale and quantized with round half up. Points landing on the
// same voxel are merged: color (and normal, when present) become the mean of
// the contributors, color rounded half up per channel. Output is sorted by
// (x, y, z).
PointCloud voxelize(const PointCloud& cloud, int precision_bits);

// Smallest precision (>= 1) whose grid covers all coordinates. Requires the
// cloud to hold non-negative integer coordinates already.
int infer_precision(const PointCloud& cloud);

}  // namespace pcqa
