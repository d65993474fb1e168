#pragma once

#include <vector>

#include "pcqa/cloud.hpp"

namespace pcqa {

// Per-point unit normals from PCA over the k nearest neighbors (the point
// itself included): the eigenvector of the smallest covariance eigenvalue.
// The sign is flipped to point away from the cloud centroid; callers that
// square the projection (point-to-plane error) are sign-independent anyway.
// Requires k >= 3 and k <= cloud.size().
std::vector<Vec3> estimate_normals(const PointCloud& cloud, int k = 16);

}  // namespace pcqa
