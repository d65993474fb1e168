#include "pcqa/pipeline.hpp"

#include <nlohmann/json.hpp>
#include <utility>

#include "pcqa/error.hpp"
#include "pcqa/parallel.hpp"

namespace pcqa {

const char* to_string(BranchId branch) {
  return branch == BranchId::kReference ? "reference" : "degraded";
}

std::array<ViewPair, 6> branch_views(const PointCloud& geometry_cloud,
                                     const PointCloud& opposite_cloud,
                                     const CorrespondenceMap& map, BranchId branch,
                                     const PipelineConfig& config) {
  const PointCloud transferred = recolor(geometry_cloud, opposite_cloud, map);

  ProjectionSet own = filter_occlusions(project(geometry_cloud), config.window, config.tau);
  ProjectionSet other = filter_occlusions(project(transferred), config.window, config.tau);

  std::array<ViewPair, 6> pairs;
  parallel_for(6, [&](std::size_t i) {
    const ViewImage& v_own = own.views[i];
    const ViewImage& v_other = other.views[i];
    // Same geometry went through the same projection code; the maps must
    // match bit for bit.
    if (!(v_own.occupancy == v_other.occupancy) || !(v_own.depth == v_other.depth)) {
      throw InternalError(std::string("branch occupancy/depth mismatch on plane ") +
                          to_string(v_own.plane));
    }

    const CropRect rect = compute_crop(v_own.occupancy);
    const ViewImage c_own = crop(v_own, rect);
    const ViewImage c_other = crop(v_other, rect);

    ViewPair& pair = pairs[i];
    pair.plane = v_own.plane;
    pair.occupancy = c_own.occupancy;
    RgbImage padded_own = pad(c_own.image, pair.occupancy);
    RgbImage padded_other = pad(c_other.image, pair.occupancy);
    if (branch == BranchId::kReference) {
      // Reference geometry: own colors are the reference side.
      pair.reference_image = std::move(padded_own);
      pair.degraded_image = std::move(padded_other);
    } else {
      pair.reference_image = std::move(padded_other);
      pair.degraded_image = std::move(padded_own);
    }
  });
  return pairs;
}

BranchScore score_branch(const std::array<ViewPair, 6>& pairs, const Metric2D& metric,
                         BranchId branch) {
  BranchScore score;
  score.branch = branch;
  parallel_for(6, [&](std::size_t i) {
    const ViewPair& pair = pairs[i];
    score.views[i] = ViewScore{
        pair.plane, eval_metric(metric, rgb_to_luma(pair.reference_image),
                                rgb_to_luma(pair.degraded_image))};
  });
  double sum = 0.0;
  for (const ViewScore& v : score.views) sum += v.score;
  score.pooled = sum / 6.0;
  return score;
}

BranchScore score_branch_external(const ExternalScores& table, const std::string& sample_id,
                                  BranchId branch, const std::string& metric_name) {
  BranchScore score;
  score.branch = branch;
  double sum = 0.0;
  for (std::size_t i = 0; i < kAllPlanes.size(); ++i) {
    const double s = table.lookup(sample_id, to_string(branch), kAllPlanes[i], metric_name);
    score.views[i] = ViewScore{kAllPlanes[i], s};
    sum += s;
  }
  score.pooled = sum / 6.0;
  return score;
}

MetricReport jgc_projqm(const PointCloud& ref, const PointCloud& deg,
                        const Metric2D& metric, const FusionParams& fusion,
                        const PipelineConfig& config, const std::string& sample_id,
                        const ExternalScores* external, ViewCapture* capture) {
  MetricReport report;
  report.sample_id = sample_id;
  report.metric = metric.name;
  report.tau = config.tau;
  report.window = config.window;
  report.alpha = fusion.alpha;
  report.beta = fusion.beta;

  if (metric.is_external()) {
    if (!external) {
      throw InputError("metric '" + metric.name + "' needs an external score file");
    }
    report.precision = ref.precision;
    report.reference_branch = score_branch_external(*external, sample_id,
                                                    BranchId::kReference, metric.external_name);
    report.degraded_branch = score_branch_external(*external, sample_id,
                                                   BranchId::kDegraded, metric.external_name);
  } else {
    if (!ref.voxelized() || !deg.voxelized()) {
      throw InputError("jgc_projqm requires voxelized clouds");
    }
    if (ref.precision != deg.precision) {
      throw InputError("precision mismatch between reference and degraded clouds");
    }
    report.precision = ref.precision;

    const NNIndex ref_index(ref);
    const NNIndex deg_index(deg);
    const CorrespondenceMap ref_to_deg =
        compute_correspondences(ref, deg, ref_index, deg_index);
    const CorrespondenceMap deg_to_ref = ref_to_deg.swapped();

    const auto ref_pairs =
        branch_views(ref, deg, ref_to_deg, BranchId::kReference, config);
    const auto deg_pairs =
        branch_views(deg, ref, deg_to_ref, BranchId::kDegraded, config);
    report.reference_branch = score_branch(ref_pairs, metric, BranchId::kReference);
    report.degraded_branch = score_branch(deg_pairs, metric, BranchId::kDegraded);
    if (capture) {
      capture->reference_branch = ref_pairs;
      capture->degraded_branch = deg_pairs;
    }
  }

  report.fused = fusion.alpha * report.reference_branch.pooled +
                 fusion.beta * report.degraded_branch.pooled;
  return report;
}

std::string report_to_json(const MetricReport& report) {
  nlohmann::ordered_json j;
  j["sample_id"] = report.sample_id;
  j["metric"] = report.metric;
  j["config"] = {{"precision", report.precision},
                 {"tau", report.tau},
                 {"window", report.window},
                 {"alpha", report.alpha},
                 {"beta", report.beta}};
  for (const BranchScore* branch : {&report.reference_branch, &report.degraded_branch}) {
    nlohmann::ordered_json views = nlohmann::ordered_json::array();
    for (const ViewScore& v : branch->views) {
      views.push_back({{"plane", to_string(v.plane)}, {"score", v.score}});
    }
    j[std::string("branch_") + to_string(branch->branch)] = {{"views", views},
                                                             {"pooled", branch->pooled}};
  }
  j["fused"] = report.fused;
  return j.dump(2) + "\n";
}

}  // namespace pcqa
