#include "pcqa/recolor.hpp"

#include <cmath>
#include <cstdint>
#include <string>

#include "pcqa/error.hpp"
#include "pcqa/parallel.hpp"

namespace pcqa {

CorrespondenceMap compute_correspondences(const PointCloud& a, const PointCloud& b) {
  if (a.empty() || b.empty()) {
    throw InputError("correspondences require two non-empty clouds");
  }
  const NNIndex index_a(a);
  const NNIndex index_b(b);
  return compute_correspondences(a, b, index_a, index_b);
}

CorrespondenceMap compute_correspondences(const PointCloud& a, const PointCloud& b,
                                          const NNIndex& index_a, const NNIndex& index_b) {
  if (a.empty() || b.empty()) {
    throw InputError("correspondences require two non-empty clouds");
  }
  CorrespondenceMap map;
  map.nn_a.resize(a.size());
  map.nn_b.resize(b.size());
  parallel_for(a.size(), [&](std::size_t i) {
    map.nn_a[i] = index_b.nearest(a.positions[i]).index;
  });
  parallel_for(b.size(), [&](std::size_t i) {
    map.nn_b[i] = index_a.nearest(b.positions[i]).index;
  });
  return map;
}

PointCloud recolor(const PointCloud& geometry_src, const PointCloud& color_src) {
  return recolor(geometry_src, color_src,
                 compute_correspondences(geometry_src, color_src));
}

PointCloud recolor(const PointCloud& geometry_src, const PointCloud& color_src,
                   const CorrespondenceMap& map) {
  if (map.nn_a.size() != geometry_src.size() || map.nn_b.size() != color_src.size()) {
    throw InternalError("correspondence map does not match the cloud pair");
  }

  const std::size_t n = geometry_src.size();
  std::vector<std::uint32_t> count(n, 0);
  std::vector<std::array<std::uint64_t, 3>> sum(n, {0, 0, 0});
  for (std::size_t b = 0; b < color_src.size(); ++b) {
    const std::uint32_t a = map.nn_b[b];
    ++count[a];
    for (int ch = 0; ch < 3; ++ch) sum[a][ch] += color_src.colors[b][ch];
  }

  PointCloud out;
  out.positions = geometry_src.positions;
  out.normals = geometry_src.normals;
  out.precision = geometry_src.precision;
  out.colors.resize(n);
  parallel_for(n, [&](std::size_t a) {
    if (count[a] > 0) {
      for (int ch = 0; ch < 3; ++ch) {
        out.colors[a][ch] = static_cast<std::uint8_t>(std::floor(
            static_cast<double>(sum[a][ch]) / static_cast<double>(count[a]) + 0.5));
      }
    } else {
      out.colors[a] = color_src.colors[map.nn_a[a]];
    }
  });
  return out;
}

}  // namespace pcqa
