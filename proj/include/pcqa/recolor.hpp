#pragma once

#include <cstdint>
#include <vector>

#include "pcqa/cloud.hpp"
#include "pcqa/kdtree.hpp"

namespace pcqa {

// Bidirectional exact nearest-neighbor correspondences between two clouds.
struct CorrespondenceMap {
  std::vector<std::uint32_t> nn_a;  // per point of A: nearest index in B
  std::vector<std::uint32_t> nn_b;  // per point of B: nearest index in A

  // The same correspondences viewed from (B, A).
  CorrespondenceMap swapped() const { return CorrespondenceMap{nn_b, nn_a}; }
};

CorrespondenceMap compute_correspondences(const PointCloud& a, const PointCloud& b);
CorrespondenceMap compute_correspondences(const PointCloud& a, const PointCloud& b,
                                          const NNIndex& index_a, const NNIndex& index_b);

// Transfers color from color_src onto the geometry of geometry_src. A point
// that is the nearest neighbor of one or more color_src points takes the
// per-channel mean of those colors (round half up); a point nobody maps to
// falls back to the color of its own nearest neighbor in color_src. Positions
// (and normals) of geometry_src are preserved exactly.
PointCloud recolor(const PointCloud& geometry_src, const PointCloud& color_src);

// Same, with correspondences precomputed as
// compute_correspondences(geometry_src, color_src).
PointCloud recolor(const PointCloud& geometry_src, const PointCloud& color_src,
                   const CorrespondenceMap& map);

}  // namespace pcqa
