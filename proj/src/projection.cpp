#include "pcqa/projection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pcqa/error.hpp"
#include "pcqa/parallel.hpp"

namespace pcqa {

const char* to_string(PlaneId plane) {
  switch (plane) {
    case PlaneId::kXY: return "xy";
    case PlaneId::kXZ: return "xz";
    case PlaneId::kYZ: return "yz";
    case PlaneId::kXYP: return "xyp";
    case PlaneId::kXZP: return "xzp";
    case PlaneId::kYZP: return "yzp";
  }
  return "?";
}

PlaneId parse_plane(std::string_view token) {
  for (PlaneId p : kAllPlanes) {
    if (token == to_string(p)) return p;
  }
  throw InputError("unknown plane token '" + std::string(token) + "'");
}

ProjectionSet project(const PointCloud& cloud) {
  if (cloud.empty()) throw InputError("cannot project an empty cloud");
  if (!cloud.voxelized()) throw InputError("projection requires a voxelized cloud");

  const int p = cloud.precision;
  const int side = 1 << p;
  for (const Vec3& pos : cloud.positions) {
    for (double c : pos) {
      if (c < 0.0 || c > side - 1 || std::floor(c) != c) {
        throw InputError("coordinate outside [0, 2^p - 1]");
      }
    }
  }

  ProjectionSet set;
  set.precision = p;
  for (PlaneId plane : kAllPlanes) {
    ViewImage& v = set.view(plane);
    v.plane = plane;
    v.image = RgbImage(side, side, kBackground);
    v.occupancy = MaskImage(side, side, 0);
    v.depth = DepthImage(side, side, is_min_depth(plane) ? side : 0);
  }

  // Per axis pair: (row coordinate, col coordinate, depth coordinate,
  // max-depth view, min-depth view). The three pairs touch disjoint buffers.
  struct AxisPair {
    int row, col, depth;
    PlaneId max_view, min_view;
  };
  static constexpr AxisPair kPairs[3] = {
      {0, 1, 2, PlaneId::kXY, PlaneId::kXYP},
      {0, 2, 1, PlaneId::kXZ, PlaneId::kXZP},
      {1, 2, 0, PlaneId::kYZ, PlaneId::kYZP},
  };

  parallel_for(3, [&](std::size_t pi) {
    const AxisPair& ap = kPairs[pi];
    ViewImage& vmax = set.view(ap.max_view);
    ViewImage& vmin = set.view(ap.min_view);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const Vec3& pos = cloud.positions[i];
      const int r = static_cast<int>(pos[ap.row]);
      const int c = static_cast<int>(pos[ap.col]);
      const int d = static_cast<int>(pos[ap.depth]);
      if (d >= vmax.depth.at(r, c)) {
        vmax.depth.at(r, c) = d;
        vmax.occupancy.at(r, c) = 1;
        vmax.image.at(r, c) = cloud.colors[i];
      }
      if (d <= vmin.depth.at(r, c)) {
        vmin.depth.at(r, c) = d;
        vmin.occupancy.at(r, c) = 1;
        vmin.image.at(r, c) = cloud.colors[i];
      }
    }
  });
  return set;
}

namespace {

void filter_view(ViewImage& v, int window, int tau, int init_depth) {
  const int rows = v.occupancy.rows;
  const int cols = v.occupancy.cols;
  const int half = window / 2;

  // Integral images of occupancy count and occupied depth, so the window mean
  // is an exact integer comparison per pixel.
  Plane<std::int64_t> icnt(rows + 1, cols + 1, 0);
  Plane<std::int64_t> isum(rows + 1, cols + 1, 0);
  for (int r = 0; r < rows; ++r) {
    std::int64_t run_cnt = 0, run_sum = 0;
    for (int c = 0; c < cols; ++c) {
      if (v.occupancy.at(r, c)) {
        ++run_cnt;
        run_sum += v.depth.at(r, c);
      }
      icnt.at(r + 1, c + 1) = icnt.at(r, c + 1) + run_cnt;
      isum.at(r + 1, c + 1) = isum.at(r, c + 1) + run_sum;
    }
  }
  auto window_totals = [&](int r, int c, std::int64_t& cnt, std::int64_t& sum) {
    const int r0 = std::max(0, r - half), r1 = std::min(rows - 1, r + half);
    const int c0 = std::max(0, c - half), c1 = std::min(cols - 1, c + half);
    cnt = icnt.at(r1 + 1, c1 + 1) - icnt.at(r0, c1 + 1) - icnt.at(r1 + 1, c0) + icnt.at(r0, c0);
    sum = isum.at(r1 + 1, c1 + 1) - isum.at(r0, c1 + 1) - isum.at(r1 + 1, c0) + isum.at(r0, c0);
  };

  const bool min_view = is_min_depth(v.plane);
  std::vector<std::pair<int, int>> removed;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (!v.occupancy.at(r, c)) continue;
      std::int64_t cnt, sum;
      window_totals(r, c, cnt, sum);
      const std::int64_t d = v.depth.at(r, c);
      cnt -= 1;  // exclude the center pixel from the mean
      sum -= d;
      if (cnt == 0) continue;
      // d - sum/cnt >= tau (min views) resp. sum/cnt - d >= tau (max views),
      // kept in integers.
      const std::int64_t deviation = min_view ? d * cnt - sum : sum - d * cnt;
      if (deviation >= static_cast<std::int64_t>(tau) * cnt) removed.emplace_back(r, c);
    }
  }
  for (const auto& [r, c] : removed) {
    v.occupancy.at(r, c) = 0;
    v.image.at(r, c) = kBackground;
    v.depth.at(r, c) = init_depth;
  }
}

}  // namespace

ProjectionSet filter_occlusions(ProjectionSet set, int window, int tau) {
  if (window < 3 || window % 2 == 0) {
    throw InputError("filter window must be odd and >= 3");
  }
  if (tau <= 0) throw InputError("filter threshold tau must be positive");

  const int side = 1 << set.precision;
  parallel_for(6, [&](std::size_t i) {
    ViewImage& v = set.views[i];
    filter_view(v, window, tau, is_min_depth(v.plane) ? side : 0);
  });
  return set;
}

CropRect compute_crop(const MaskImage& occupancy) {
  CropRect rect{occupancy.rows, occupancy.cols, -1, -1};
  for (int r = 0; r < occupancy.rows; ++r) {
    for (int c = 0; c < occupancy.cols; ++c) {
      if (!occupancy.at(r, c)) continue;
      rect.row_min = std::min(rect.row_min, r);
      rect.col_min = std::min(rect.col_min, c);
      rect.row_max = std::max(rect.row_max, r);
      rect.col_max = std::max(rect.col_max, c);
    }
  }
  if (rect.row_max < 0) throw InputError("nothing projected: occupancy map is empty");
  return rect;
}

ViewImage crop(const ViewImage& view, const CropRect& rect) {
  if (rect.row_min < 0 || rect.col_min < 0 || rect.row_max >= view.image.rows ||
      rect.col_max >= view.image.cols || rect.row_min > rect.row_max ||
      rect.col_min > rect.col_max) {
    throw InputError("crop rectangle out of bounds");
  }
  ViewImage out;
  out.plane = view.plane;
  out.image = RgbImage(rect.rows(), rect.cols());
  out.occupancy = MaskImage(rect.rows(), rect.cols());
  out.depth = DepthImage(rect.rows(), rect.cols());
  for (int r = 0; r < rect.rows(); ++r) {
    for (int c = 0; c < rect.cols(); ++c) {
      out.image.at(r, c) = view.image.at(rect.row_min + r, rect.col_min + c);
      out.occupancy.at(r, c) = view.occupancy.at(rect.row_min + r, rect.col_min + c);
      out.depth.at(r, c) = view.depth.at(rect.row_min + r, rect.col_min + c);
    }
  }
  return out;
}

namespace {

constexpr double kPadTolerance = 0.1;  // color levels, final level
constexpr int kPadMaxSweeps = 2000;
// Coarse levels only need to clean up interpolation error, which is
// high-frequency and dies within a few dozen sweeps; a fixed budget keeps the
// total work linear in the image size.
constexpr double kPadCoarseTolerance = 0.002;
constexpr int kPadCoarseMaxSweeps = 48;

inline int reflect(int i, int n) { return i < 0 ? 0 : (i >= n ? n - 1 : i); }

// Gauss-Seidel relaxation of the unoccupied pixels, scanline order, until the
// largest change in a sweep is below tol or max_sweeps is hit.
void relax(Plane<double>& img, const std::vector<std::pair<int, int>>& holes,
           double tol, int max_sweeps) {
  const int rows = img.rows, cols = img.cols;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_delta = 0.0;
    for (const auto& [r, c] : holes) {
      const double next = 0.25 * (img.at(reflect(r - 1, rows), c) +
                                  img.at(reflect(r + 1, rows), c) +
                                  img.at(r, reflect(c - 1, cols)) +
                                  img.at(r, reflect(c + 1, cols)));
      max_delta = std::max(max_delta, std::abs(next - img.at(r, c)));
      img.at(r, c) = next;
    }
    if (max_delta < tol) break;
  }
}

// Coarse-to-fine harmonic fill of one channel. Occupied pixels are kept; the
// coarse level provides the initial guess for the holes, then relax() runs at
// this level with the given stop tolerance and sweep budget.
void solve_channel(Plane<double>& img, const MaskImage& occ, double tol, int max_sweeps) {
  const int rows = img.rows, cols = img.cols;

  std::vector<std::pair<int, int>> holes;
  double occ_sum = 0.0;
  std::size_t occ_count = 0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (occ.at(r, c)) {
        occ_sum += img.at(r, c);
        ++occ_count;
      } else {
        holes.emplace_back(r, c);
      }
    }
  }
  if (holes.empty()) return;

  if (rows <= 4 || cols <= 4) {
    const double mean = occ_sum / static_cast<double>(occ_count);
    for (const auto& [r, c] : holes) img.at(r, c) = mean;
    relax(img, holes, kPadCoarseTolerance, kPadMaxSweeps);
    return;
  }

  // Downsample: a coarse pixel is occupied when any of its fine pixels is,
  // valued at the mean of the occupied ones.
  const int crows = (rows + 1) / 2, ccols = (cols + 1) / 2;
  Plane<double> cimg(crows, ccols, 0.0);
  MaskImage cocc(crows, ccols, 0);
  for (int r = 0; r < crows; ++r) {
    for (int c = 0; c < ccols; ++c) {
      double sum = 0.0;
      int cnt = 0;
      for (int dr = 0; dr < 2; ++dr) {
        for (int dc = 0; dc < 2; ++dc) {
          const int fr = 2 * r + dr, fc = 2 * c + dc;
          if (fr >= rows || fc >= cols || !occ.at(fr, fc)) continue;
          sum += img.at(fr, fc);
          ++cnt;
        }
      }
      if (cnt > 0) {
        cimg.at(r, c) = sum / cnt;
        cocc.at(r, c) = 1;
      }
    }
  }
  solve_channel(cimg, cocc, kPadCoarseTolerance, kPadCoarseMaxSweeps);

  for (const auto& [r, c] : holes) img.at(r, c) = cimg.at(r / 2, c / 2);
  relax(img, holes, tol, max_sweeps);
}

}  // namespace

RgbImage pad(const RgbImage& image, const MaskImage& occupancy) {
  if (image.rows != occupancy.rows || image.cols != occupancy.cols) {
    throw InputError("padding: image and occupancy shapes differ");
  }
  bool any_occupied = false;
  bool any_hole = false;
  for (std::uint8_t o : occupancy.data) {
    if (o) {
      any_occupied = true;
    } else {
      any_hole = true;
    }
  }
  if (!any_occupied) {
    throw InputError("padding: occupancy map is empty, nothing anchors the fill");
  }
  if (!any_hole) return image;

  RgbImage out = image;
  parallel_for(3, [&](std::size_t ch) {
    Plane<double> plane(image.rows, image.cols, 0.0);
    for (int r = 0; r < image.rows; ++r) {
      for (int c = 0; c < image.cols; ++c) {
        plane.at(r, c) = static_cast<double>(image.at(r, c)[ch]);
      }
    }
    solve_channel(plane, occupancy, kPadTolerance, kPadMaxSweeps);
    for (int r = 0; r < image.rows; ++r) {
      for (int c = 0; c < image.cols; ++c) {
        if (occupancy.at(r, c)) continue;  // occupied pixels stay bit-exact
        const double v = std::floor(plane.at(r, c) + 0.5);
        out.at(r, c)[ch] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
      }
    }
  });
  return out;
}

}  // namespace pcqa
