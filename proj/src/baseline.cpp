#include "pcqa/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "pcqa/error.hpp"
#include "pcqa/kdtree.hpp"
#include "pcqa/normals.hpp"
#include "pcqa/parallel.hpp"

namespace pcqa {

namespace {

void require_same_precision(const PointCloud& ref, const PointCloud& deg) {
  if (!ref.voxelized() || !deg.voxelized()) {
    throw InputError("geometry metrics require voxelized clouds");
  }
  if (ref.precision != deg.precision) {
    throw InputError("precision mismatch between reference and degraded clouds");
  }
}

double geometry_peak_energy(int precision, GeometryPeak peak) {
  const double axis = static_cast<double>((1u << precision) - 1u);
  const double factor = peak == GeometryPeak::kBoxDiagonal ? 3.0 : 1.0;
  return factor * axis * axis;
}

double psnr_from_mse(double mse, double peak_energy) {
  if (mse == 0.0) return 100.0;
  return std::min(100.0, 10.0 * std::log10(peak_energy / mse));
}

// Mean of fn(i, nn_in_other(i)) over the points of `from`, with per-point
// values stored first so the reduction order never depends on threading.
template <typename Fn>
double directional_mean(const PointCloud& from, const NNIndex& other_index, Fn&& fn) {
  std::vector<double> values(from.size());
  parallel_for(from.size(), [&](std::size_t i) {
    const Neighbor nb = other_index.nearest(from.positions[i]);
    values[i] = fn(i, nb);
  });
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double luma709(const Rgb8& c) {
  return 0.2126 * c[0] + 0.7152 * c[1] + 0.0722 * c[2];
}

}  // namespace

SymmetricResult d1(const PointCloud& ref, const PointCloud& deg, GeometryPeak peak) {
  require_same_precision(ref, deg);
  const NNIndex ref_index(ref);
  const NNIndex deg_index(deg);

  const double fwd = directional_mean(
      ref, deg_index, [](std::size_t, const Neighbor& nb) { return nb.dist2; });
  const double bwd = directional_mean(
      deg, ref_index, [](std::size_t, const Neighbor& nb) { return nb.dist2; });
  const double sym = std::max(fwd, bwd);
  return SymmetricResult{fwd, bwd, sym,
                         psnr_from_mse(sym, geometry_peak_energy(ref.precision, peak))};
}

SymmetricResult d2(const PointCloud& ref, const PointCloud& deg, const D2Options& options) {
  require_same_precision(ref, deg);

  std::vector<Vec3> normals;
  const std::vector<Vec3>* ref_normals = &ref.normals;
  if (!ref.has_normals()) {
    if (!options.estimate_when_missing) {
      throw InputError("reference cloud has no normals and estimation is disabled");
    }
    normals = estimate_normals(ref, options.estimation_k);
    ref_normals = &normals;
  }

  const NNIndex ref_index(ref);
  const NNIndex deg_index(deg);
  auto plane_error = [&](const Vec3& a, const Vec3& b, const Vec3& n) {
    const double dot = (a[0] - b[0]) * n[0] + (a[1] - b[1]) * n[1] + (a[2] - b[2]) * n[2];
    return dot * dot;
  };

  // ref -> deg: the pair's reference point is the query itself.
  const double fwd = directional_mean(ref, deg_index, [&](std::size_t i, const Neighbor& nb) {
    return plane_error(ref.positions[i], deg.positions[nb.index], (*ref_normals)[i]);
  });
  // deg -> ref: the reference point is the matched neighbor.
  const double bwd = directional_mean(deg, ref_index, [&](std::size_t i, const Neighbor& nb) {
    return plane_error(deg.positions[i], ref.positions[nb.index], (*ref_normals)[nb.index]);
  });
  const double sym = std::max(fwd, bwd);
  return SymmetricResult{fwd, bwd, sym,
                         psnr_from_mse(sym, geometry_peak_energy(ref.precision, options.peak))};
}

HausdorffResult hausdorff_po2po(const PointCloud& ref, const PointCloud& deg) {
  if (ref.empty() || deg.empty()) {
    throw InputError("Hausdorff distance requires non-empty clouds");
  }
  const NNIndex ref_index(ref);
  const NNIndex deg_index(deg);

  auto directional_max = [](const PointCloud& from, const NNIndex& other) {
    std::vector<double> d2(from.size());
    parallel_for(from.size(), [&](std::size_t i) {
      d2[i] = other.nearest(from.positions[i]).dist2;
    });
    return std::sqrt(*std::max_element(d2.begin(), d2.end()));
  };

  const double fwd = directional_max(ref, deg_index);
  const double bwd = directional_max(deg, ref_index);
  return HausdorffResult{fwd, bwd, std::max(fwd, bwd)};
}

SymmetricResult point_y_psnr(const PointCloud& ref, const PointCloud& deg) {
  if (ref.empty() || deg.empty()) {
    throw InputError("point Y-PSNR requires non-empty clouds");
  }
  const NNIndex ref_index(ref);
  const NNIndex deg_index(deg);

  const double fwd = directional_mean(ref, deg_index, [&](std::size_t i, const Neighbor& nb) {
    const double d = luma709(ref.colors[i]) - luma709(deg.colors[nb.index]);
    return d * d;
  });
  const double bwd = directional_mean(deg, ref_index, [&](std::size_t i, const Neighbor& nb) {
    const double d = luma709(deg.colors[i]) - luma709(ref.colors[nb.index]);
    return d * d;
  });
  const double sym = std::max(fwd, bwd);
  return SymmetricResult{fwd, bwd, sym, psnr_from_mse(sym, 255.0 * 255.0)};
}

}  // namespace pcqa
