#include "pcqa/normals.hpp"

#include <Eigen/Dense>
#include <string>

#include "pcqa/error.hpp"
#include "pcqa/kdtree.hpp"
#include "pcqa/parallel.hpp"

namespace pcqa {

std::vector<Vec3> estimate_normals(const PointCloud& cloud, int k) {
  if (k < 3) throw InputError("normal estimation requires k >= 3");
  if (static_cast<std::size_t>(k) > cloud.size()) {
    throw InputError("normal estimation: k = " + std::to_string(k) +
                     " exceeds cloud size " + std::to_string(cloud.size()));
  }

  const NNIndex index(cloud);

  Vec3 centroid = {0.0, 0.0, 0.0};
  for (const Vec3& p : cloud.positions) {
    for (int a = 0; a < 3; ++a) centroid[a] += p[a];
  }
  for (int a = 0; a < 3; ++a) centroid[a] /= static_cast<double>(cloud.size());

  std::vector<Vec3> normals(cloud.size());
  parallel_for(cloud.size(), [&](std::size_t i) {
    const auto nbrs = index.k_nearest(cloud.positions[i], static_cast<std::size_t>(k));

    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const Neighbor& nb : nbrs) {
      const Vec3& p = cloud.positions[nb.index];
      mean += Eigen::Vector3d(p[0], p[1], p[2]);
    }
    mean /= static_cast<double>(nbrs.size());

    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const Neighbor& nb : nbrs) {
      const Vec3& p = cloud.positions[nb.index];
      const Eigen::Vector3d d = Eigen::Vector3d(p[0], p[1], p[2]) - mean;
      cov += d * d.transpose();
    }

    // Eigen sorts eigenvalues ascending; column 0 is the surface normal
    // direction. Degenerate neighborhoods (collinear, coincident) still yield
    // an orthonormal basis, so the result stays unit length.
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    Eigen::Vector3d n = solver.eigenvectors().col(0);
    n.normalize();

    const Vec3& p = cloud.positions[i];
    const double outward = n[0] * (p[0] - centroid[0]) + n[1] * (p[1] - centroid[1]) +
                           n[2] * (p[2] - centroid[2]);
    if (outward < 0.0) n = -n;
    normals[i] = {n[0], n[1], n[2]};
  });
  return normals;
}

}  // namespace pcqa
