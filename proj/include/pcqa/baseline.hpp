#pragma once

#include "pcqa/cloud.hpp"

namespace pcqa {

// PSNR peak convention for geometry errors: the squared precision-box
// diagonal 3*(2^p - 1)^2 (MPEG common test conditions) or the squared axis
// length (2^p - 1)^2 for cross-checks.
enum class GeometryPeak { kBoxDiagonal, kAxis };

struct SymmetricResult {
  double mse_forward;   // ref -> deg correspondences
  double mse_backward;  // deg -> ref correspondences
  double mse_symmetric; // max of the two
  double psnr;          // from the symmetric MSE, capped at 100 dB
};

struct HausdorffResult {
  double forward;
  double backward;
  double symmetric;  // max of the two
};

// Point-to-point MSE (D1) and PSNR. Both clouds must be voxelized at the
// same precision.
SymmetricResult d1(const PointCloud& ref, const PointCloud& deg,
                   GeometryPeak peak = GeometryPeak::kBoxDiagonal);

struct D2Options {
  bool estimate_when_missing = true;  // run PCA normals when the file has none
  int estimation_k = 16;
  GeometryPeak peak = GeometryPeak::kBoxDiagonal;
};

// Point-to-plane MSE (D2) and PSNR: the correspondence error vector projected
// onto the reference-side normal (the normal of the reference point of each
// pair, in both directions).
SymmetricResult d2(const PointCloud& ref, const PointCloud& deg,
                   const D2Options& options = {});

// Symmetric point-to-point Hausdorff distance (not squared).
HausdorffResult hausdorff_po2po(const PointCloud& ref, const PointCloud& deg);

// Luminance PSNR over nearest-neighbor pairs: BT.709 luma difference between
// each point and its correspondence, per-direction MSE, symmetric max, peak
// 255^2.
SymmetricResult point_y_psnr(const PointCloud& ref, const PointCloud& deg);

}  // namespace pcqa
