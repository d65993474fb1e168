#include "pcqa/cloud.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>

#include "pcqa/error.hpp"

namespace pcqa {

namespace {

bool integral_in_grid(const PointCloud& cloud, double grid_max) {
  for (const Vec3& p : cloud.positions) {
    for (double c : p) {
      if (c < 0.0 || c > grid_max || std::floor(c) != c) return false;
    }
  }
  return true;
}

std::uint64_t pack_voxel(std::uint32_t x, std::uint32_t y, std::uint32_t z) {
  return (static_cast<std::uint64_t>(x) << 42) |
         (static_cast<std::uint64_t>(y) << 21) | static_cast<std::uint64_t>(z);
}

}  // namespace

PointCloud voxelize(const PointCloud& cloud, int precision_bits) {
  if (precision_bits < 1 || precision_bits > kMaxPrecision) {
    throw InputError("precision must be in [1, " +
                     std::to_string(kMaxPrecision) + "], got " +
                     std::to_string(precision_bits));
  }
  if (cloud.empty()) throw InputError("cannot voxelize an empty cloud");
  if (cloud.colors.size() != cloud.positions.size()) {
    throw InputError("cloud has " + std::to_string(cloud.positions.size()) +
                     " positions but " + std::to_string(cloud.colors.size()) +
                     " colors");
  }

  const double grid_max = static_cast<double>((1u << precision_bits) - 1u);
  const bool keep_scale = integral_in_grid(cloud, grid_max);

  Vec3 lo = cloud.positions[0];
  double scale = 1.0;
  if (!keep_scale) {
    Vec3 hi = cloud.positions[0];
    for (const Vec3& p : cloud.positions) {
      for (int a = 0; a < 3; ++a) {
        lo[a] = std::min(lo[a], p[a]);
        hi[a] = std::max(hi[a], p[a]);
      }
    }
    const double extent =
        std::max({hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]});
    if (!(extent > 0.0)) {
      throw InputError("degenerate bounding box: all points coincide");
    }
    scale = grid_max / extent;
  } else {
    lo = {0.0, 0.0, 0.0};
  }

  const std::size_t n = cloud.size();
  std::vector<std::pair<std::uint64_t, std::uint32_t>> keyed(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::array<std::uint32_t, 3> v;
    for (int a = 0; a < 3; ++a) {
      const double q = std::floor((cloud.positions[i][a] - lo[a]) * scale + 0.5);
      v[a] = static_cast<std::uint32_t>(std::min(std::max(q, 0.0), grid_max));
    }
    keyed[i] = {pack_voxel(v[0], v[1], v[2]), static_cast<std::uint32_t>(i)};
  }
  std::sort(keyed.begin(), keyed.end());

  const bool carry_normals = cloud.has_normals();
  PointCloud out;
  out.precision = precision_bits;
  out.positions.reserve(n);
  out.colors.reserve(n);
  if (carry_normals) out.normals.reserve(n);

  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    std::uint64_t sum[3] = {0, 0, 0};
    Vec3 nsum = {0.0, 0.0, 0.0};
    while (j < n && keyed[j].first == keyed[i].first) {
      const Rgb8& c = cloud.colors[keyed[j].second];
      for (int ch = 0; ch < 3; ++ch) sum[ch] += c[ch];
      if (carry_normals) {
        const Vec3& nrm = cloud.normals[keyed[j].second];
        for (int a = 0; a < 3; ++a) nsum[a] += nrm[a];
      }
      ++j;
    }
    const std::uint64_t key = keyed[i].first;
    const double cnt = static_cast<double>(j - i);
    out.positions.push_back({static_cast<double>((key >> 42) & 0x1fffff),
                             static_cast<double>((key >> 21) & 0x1fffff),
                             static_cast<double>(key & 0x1fffff)});
    Rgb8 merged;
    for (int ch = 0; ch < 3; ++ch) {
      merged[ch] = static_cast<std::uint8_t>(
          std::floor(static_cast<double>(sum[ch]) / cnt + 0.5));
    }
    out.colors.push_back(merged);
    if (carry_normals) {
      const double len =
          std::sqrt(nsum[0] * nsum[0] + nsum[1] * nsum[1] + nsum[2] * nsum[2]);
      if (len > 1e-12) {
        out.normals.push_back({nsum[0] / len, nsum[1] / len, nsum[2] / len});
      } else {
        out.normals.push_back({0.0, 0.0, 1.0});
      }
    }
    i = j;
  }
  return out;
}

int infer_precision(const PointCloud& cloud) {
  if (cloud.empty()) throw InputError("cannot infer precision of an empty cloud");
  double max_coord = 0.0;
  for (const Vec3& p : cloud.positions) {
    for (double c : p) {
      if (c < 0.0 || std::floor(c) != c) {
        throw InputError(
            "cannot infer precision: coordinates are not non-negative "
            "integers; pass an explicit precision");
      }
      max_coord = std::max(max_coord, c);
    }
  }
  int p = 1;
  while (p < kMaxPrecision &&
         max_coord > static_cast<double>((1u << p) - 1u)) {
    ++p;
  }
  if (max_coord > static_cast<double>((1u << p) - 1u)) {
    throw InputError("coordinates exceed the maximum supported grid (2^" +
                     std::to_string(kMaxPrecision) + ")");
  }
  return p;
}

}  // namespace pcqa
