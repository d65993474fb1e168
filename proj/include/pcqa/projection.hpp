#pragma once

#include <array>
#include <string_view>

#include "pcqa/cloud.hpp"
#include "pcqa/image.hpp"

namespace pcqa {

// The six faces of the precision box. The plain planes (xy, xz, yz) keep,
// per pixel, the point with the largest perpendicular coordinate; the
// "prime" planes (xyp, xzp, yzp), anchored at the opposite box corner, keep
// the smallest. Both compared clouds always go through the same convention,
// so the labeling itself carries no metric meaning.
enum class PlaneId { kXY, kXZ, kYZ, kXYP, kXZP, kYZP };

inline constexpr std::array<PlaneId, 6> kAllPlanes = {
    PlaneId::kXY, PlaneId::kXZ, PlaneId::kYZ,
    PlaneId::kXYP, PlaneId::kXZP, PlaneId::kYZP};

const char* to_string(PlaneId plane);
PlaneId parse_plane(std::string_view token);

// True for the prime planes, whose depth buffer tracks the minimum
// perpendicular coordinate.
inline bool is_min_depth(PlaneId plane) {
  return plane == PlaneId::kXYP || plane == PlaneId::kXZP || plane == PlaneId::kYZP;
}

inline constexpr Rgb8 kBackground = {255, 255, 255};

// One projected view: color image, binary occupancy and the depth buffer the
// view was resolved with. Unoccupied pixels hold the background color and the
// buffer's initial depth (0 for max-depth views, 2^p for min-depth views).
struct ViewImage {
  PlaneId plane = PlaneId::kXY;
  RgbImage image;
  MaskImage occupancy;
  DepthImage depth;
};

struct ProjectionSet {
  std::array<ViewImage, 6> views;  // order of kAllPlanes
  int precision = 0;

  const ViewImage& view(PlaneId plane) const {
    return views[static_cast<std::size_t>(plane)];
  }
  ViewImage& view(PlaneId plane) {
    return views[static_cast<std::size_t>(plane)];
  }
};

// Inclusive pixel bounds of a crop.
struct CropRect {
  int row_min = 0;
  int col_min = 0;
  int row_max = 0;
  int col_max = 0;

  int rows() const { return row_max - row_min + 1; }
  int cols() const { return col_max - col_min + 1; }
  bool operator==(const CropRect&) const = default;
};

// Orthographic projection of a voxelized cloud onto all six faces, resolving
// occlusion per pixel with the extremal perpendicular coordinate. Pixel
// addressing: (row, col) = (x, y) for the xy pair, (x, z) for xz, (y, z) for
// yz. Views are 2^p x 2^p.
ProjectionSet project(const PointCloud& cloud);

// Removes pixels showing the far side of the object through gaps in the near
// surface: an occupied pixel is dropped when its depth deviates from the mean
// depth of the occupied neighbors in the window (center excluded) by at least
// tau, toward the far side of the view's surface. Decisions are taken against
// the pre-filter state in a single pass; pixels with no occupied neighbor are
// kept. window must be odd >= 3, tau > 0.
ProjectionSet filter_occlusions(ProjectionSet set, int window, int tau);

// Tightest rectangle covering all occupied pixels; throws when nothing is
// occupied.
CropRect compute_crop(const MaskImage& occupancy);

ViewImage crop(const ViewImage& view, const CropRect& rect);

// Fills unoccupied pixels with a harmonic (Laplace) diffusion: each
// unoccupied pixel relaxes to the mean of its 4-neighbors, occupied pixels
// are a fixed boundary, the image border reflects. Sweeps run until the
// largest per-pixel change drops below 0.1 of a color level or 2000
// iterations, seeded from a coarse-to-fine solve so convergence is cheap.
// Occupied pixels are returned bit-exact.
RgbImage pad(const RgbImage& image, const MaskImage& occupancy);

}  // namespace pcqa
