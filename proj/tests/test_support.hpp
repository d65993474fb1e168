#pragma once

// Shared helpers for the test suites: synthetic clouds, temp files, and the
// independent brute-force oracles the expected values are checked against.
// Everything here stays deliberately naive (O(N*M) scans, dense solves) and
// separate from the library implementation paths.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "pcqa/cloud.hpp"
#include "pcqa/image.hpp"
#include "pcqa/projection.hpp"
#include "pcqa/random.hpp"

namespace testsupport {

// --- temp files -----------------------------------------------------------

class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("pcqa_test_" + tag + "_" + std::to_string(++counter) + "_" +
             std::to_string(static_cast<std::uint64_t>(
                 std::chrono::steady_clock::now().time_since_epoch().count())));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

private:
  std::filesystem::path path_;
};

// --- synthetic clouds -------------------------------------------------------

inline pcqa::PointCloud make_cloud(const std::vector<pcqa::Vec3>& positions,
                                   const std::vector<pcqa::Rgb8>& colors, int precision) {
  pcqa::PointCloud c;
  c.positions = positions;
  c.colors = colors;
  c.precision = precision;
  return c;
}

// Random distinct voxels with random colors on the 2^p grid.
inline pcqa::PointCloud random_voxel_cloud(pcqa::SplitMix64& rng, std::size_t n,
                                           int precision) {
  const std::uint64_t side = 1ull << precision;
  std::vector<std::uint64_t> keys;
  keys.reserve(n * 2);
  while (keys.size() < n) {
    const std::uint64_t x = rng.next_below(side);
    const std::uint64_t y = rng.next_below(side);
    const std::uint64_t z = rng.next_below(side);
    keys.push_back((x << 42) | (y << 21) | z);
    if (keys.size() == n) {
      std::sort(keys.begin(), keys.end());
      keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    }
  }
  pcqa::PointCloud cloud;
  cloud.precision = precision;
  for (std::uint64_t k : keys) {
    cloud.positions.push_back({static_cast<double>((k >> 42) & 0x1fffff),
                               static_cast<double>((k >> 21) & 0x1fffff),
                               static_cast<double>(k & 0x1fffff)});
    cloud.colors.push_back({static_cast<std::uint8_t>(rng.next_below(256)),
                            static_cast<std::uint8_t>(rng.next_below(256)),
                            static_cast<std::uint8_t>(rng.next_below(256))});
  }
  return cloud;
}

// Cube-surface shell: all voxels on the faces of [lo, hi]^3.
inline pcqa::PointCloud cube_shell_cloud(int precision, int lo, int hi) {
  pcqa::PointCloud cloud;
  cloud.precision = precision;
  for (int x = lo; x <= hi; ++x) {
    for (int y = lo; y <= hi; ++y) {
      for (int z = lo; z <= hi; ++z) {
        if (x != lo && x != hi && y != lo && y != hi && z != lo && z != hi) continue;
        cloud.positions.push_back({static_cast<double>(x), static_cast<double>(y),
                                   static_cast<double>(z)});
        cloud.colors.push_back({static_cast<std::uint8_t>(40 + (x * 31 + y * 17 + z * 7) % 180),
                                static_cast<std::uint8_t>(40 + (x * 13 + y * 29 + z * 11) % 180),
                                static_cast<std::uint8_t>(40 + (x * 5 + y * 3 + z * 23) % 180)});
      }
    }
  }
  return cloud;  // the loops emit (x, y, z) order already
}

// Drops roughly `fraction` of the points (deterministic per seed), keeping at
// least one. Models the point-count changes of lossy geometry coding.
inline pcqa::PointCloud drop_points(const pcqa::PointCloud& cloud, double fraction,
                                    std::uint64_t seed) {
  pcqa::SplitMix64 rng(seed);
  pcqa::PointCloud out;
  out.precision = cloud.precision;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (rng.next_double() < fraction) continue;
    out.positions.push_back(cloud.positions[i]);
    out.colors.push_back(cloud.colors[i]);
    if (cloud.has_normals()) out.normals.push_back(cloud.normals[i]);
  }
  if (out.empty()) {
    out.positions.push_back(cloud.positions[0]);
    out.colors.push_back(cloud.colors[0]);
    if (cloud.has_normals()) out.normals.push_back(cloud.normals[0]);
  }
  return out;
}

// Additive Gaussian color noise, rounded and clamped; geometry untouched.
inline pcqa::PointCloud with_color_noise(const pcqa::PointCloud& cloud, double sigma,
                                         std::uint64_t seed) {
  pcqa::SplitMix64 rng(seed);
  pcqa::PointCloud out = cloud;
  for (pcqa::Rgb8& c : out.colors) {
    for (int ch = 0; ch < 3; ++ch) {
      const double v = c[ch] + sigma * rng.next_gaussian();
      c[ch] = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
    }
  }
  return out;
}

// --- deterministic test images ----------------------------------------------
// Integer-only pattern + integer noise so an external implementation (used to
// freeze oracle values) regenerates the exact same pixels.

inline pcqa::LumaImage structured_image(int n = 256) {
  pcqa::LumaImage img(n, n, 0.0);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const long v = 32 + (r * 5) % 97 + (c * 3) % 89 + ((r >> 4) * (c >> 4) * 7) % 61;
      img.at(r, c) = static_cast<double>(std::min<long>(v, 255));
    }
  }
  return img;
}

// Uniform integer noise in [-spread, spread], clamped to [0, 255].
inline pcqa::LumaImage with_uniform_noise(const pcqa::LumaImage& img, int spread,
                                          std::uint64_t seed) {
  pcqa::SplitMix64 rng(seed);
  pcqa::LumaImage out = img;
  for (double& v : out.data) {
    const long noise =
        static_cast<long>(rng.next_below(2 * static_cast<std::uint64_t>(spread) + 1)) - spread;
    v = std::clamp(v + static_cast<double>(noise), 0.0, 255.0);
  }
  return out;
}

// --- brute-force oracles ----------------------------------------------------

// Exact nearest neighbor by scanning all points; ties to the lowest index.
inline std::size_t brute_nn(const std::vector<pcqa::Vec3>& pts, const pcqa::Vec3& q) {
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double dx = pts[i][0] - q[0], dy = pts[i][1] - q[1], dz = pts[i][2] - q[2];
    const double d2 = dx * dx + dy * dy + dz * dz;
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return best;
}

inline double brute_nn_dist2(const std::vector<pcqa::Vec3>& pts, const pcqa::Vec3& q) {
  const std::size_t i = brute_nn(pts, q);
  const double dx = pts[i][0] - q[0], dy = pts[i][1] - q[1], dz = pts[i][2] - q[2];
  return dx * dx + dy * dy + dz * dz;
}

// Direct implementation of the recoloring rule: mean color of the points that
// map here, else the own nearest neighbor's color.
inline pcqa::PointCloud recolor_oracle(const pcqa::PointCloud& geo,
                                       const pcqa::PointCloud& col) {
  pcqa::PointCloud out = geo;
  for (std::size_t a = 0; a < geo.size(); ++a) {
    double sum[3] = {0, 0, 0};
    int cnt = 0;
    for (std::size_t b = 0; b < col.size(); ++b) {
      if (brute_nn(geo.positions, col.positions[b]) == a) {
        for (int ch = 0; ch < 3; ++ch) sum[ch] += col.colors[b][ch];
        ++cnt;
      }
    }
    if (cnt > 0) {
      for (int ch = 0; ch < 3; ++ch) {
        out.colors[a][ch] = static_cast<std::uint8_t>(std::floor(sum[ch] / cnt + 0.5));
      }
    } else {
      out.colors[a] = col.colors[brute_nn(col.positions, geo.positions[a])];
    }
  }
  return out;
}

// Per-pixel extremal-depth projection oracle for all six views.
inline pcqa::ProjectionSet projection_oracle(const pcqa::PointCloud& cloud) {
  const int p = cloud.precision;
  const int side = 1 << p;
  pcqa::ProjectionSet set;
  set.precision = p;
  for (pcqa::PlaneId plane : pcqa::kAllPlanes) {
    pcqa::ViewImage& v = set.view(plane);
    v.plane = plane;
    v.image = pcqa::RgbImage(side, side, pcqa::kBackground);
    v.occupancy = pcqa::MaskImage(side, side, 0);
    v.depth = pcqa::DepthImage(side, side, pcqa::is_min_depth(plane) ? side : 0);
  }
  struct Pair {
    int row, col, depth;
    pcqa::PlaneId max_view, min_view;
  };
  const Pair pairs[3] = {{0, 1, 2, pcqa::PlaneId::kXY, pcqa::PlaneId::kXYP},
                         {0, 2, 1, pcqa::PlaneId::kXZ, pcqa::PlaneId::kXZP},
                         {1, 2, 0, pcqa::PlaneId::kYZ, pcqa::PlaneId::kYZP}};
  for (const Pair& ap : pairs) {
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const int r = static_cast<int>(cloud.positions[i][ap.row]);
      const int c = static_cast<int>(cloud.positions[i][ap.col]);
      const int d = static_cast<int>(cloud.positions[i][ap.depth]);
      pcqa::ViewImage& vmax = set.view(ap.max_view);
      if (!vmax.occupancy.at(r, c) || d > vmax.depth.at(r, c)) {
        vmax.occupancy.at(r, c) = 1;
        vmax.depth.at(r, c) = d;
        vmax.image.at(r, c) = cloud.colors[i];
      }
      pcqa::ViewImage& vmin = set.view(ap.min_view);
      if (!vmin.occupancy.at(r, c) || d < vmin.depth.at(r, c)) {
        vmin.occupancy.at(r, c) = 1;
        vmin.depth.at(r, c) = d;
        vmin.image.at(r, c) = cloud.colors[i];
      }
    }
  }
  return set;
}

inline bool views_equal(const pcqa::ViewImage& a, const pcqa::ViewImage& b) {
  return a.plane == b.plane && a.image == b.image && a.occupancy == b.occupancy &&
         a.depth == b.depth;
}

// --- statistics oracles -----------------------------------------------------

inline double pearson_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double num = 0, dx2 = 0, dy2 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - mx) * (y[i] - my);
    dx2 += (x[i] - mx) * (x[i] - mx);
    dy2 += (y[i] - my) * (y[i] - my);
  }
  return num / std::sqrt(dx2 * dy2);
}

inline std::vector<double> ranks_oracle(const std::vector<double>& v) {
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double below = 0, equal = 0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] < v[i]) ++below;
      if (v[j] == v[i]) ++equal;
    }
    ranks[i] = below + (equal + 1.0) / 2.0;  // average rank of the tie run
  }
  return ranks;
}

inline double spearman_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson_oracle(ranks_oracle(x), ranks_oracle(y));
}

}  // namespace testsupport
