#pragma once

#include <array>
#include <string>

#include "pcqa/cloud.hpp"
#include "pcqa/metrics2d.hpp"
#include "pcqa/projection.hpp"
#include "pcqa/recolor.hpp"

namespace pcqa {

struct PipelineConfig {
  int tau = 20;    // occlusion filter threshold
  int window = 5;  // occlusion filter window (odd)
};

// Linear fusion weights for the two branch scores.
struct FusionParams {
  double alpha = 0.5;
  double beta = 0.5;
};

enum class BranchId { kReference, kDegraded };
const char* to_string(BranchId branch);

// One cropped, padded view pair ready for a 2D metric. reference_image always
// carries the reference colors and degraded_image the degraded colors,
// whichever geometry the branch used.
struct ViewPair {
  PlaneId plane = PlaneId::kXY;
  RgbImage reference_image;
  RgbImage degraded_image;
  MaskImage occupancy;  // cropped; shared by both images of the pair
};

struct ViewScore {
  PlaneId plane;
  double score;
};

struct BranchScore {
  BranchId branch = BranchId::kReference;
  std::array<ViewScore, 6> views{};
  double pooled = 0.0;  // arithmetic mean of the six view scores
};

// Full result of one metric run, including the configuration snapshot that
// produced it. fused == alpha * reference pooled + beta * degraded pooled.
struct MetricReport {
  std::string sample_id;
  std::string metric;
  int precision = 0;
  int tau = 0;
  int window = 0;
  double alpha = 0.0;
  double beta = 0.0;
  BranchScore reference_branch;
  BranchScore degraded_branch;
  double fused = 0.0;
};

// Builds the six view pairs of one branch: projects the geometry cloud with
// its own colors and with the colors transferred from the opposite cloud,
// filters both with the same (window, tau), checks that the two projections
// share occupancy and depth bit-exactly (same geometry in, so anything else
// is a bug), then crops and pads both with the shared mask. `map` must be
// compute_correspondences(geometry_cloud, opposite_cloud).
std::array<ViewPair, 6> branch_views(const PointCloud& geometry_cloud,
                                     const PointCloud& opposite_cloud,
                                     const CorrespondenceMap& map, BranchId branch,
                                     const PipelineConfig& config);

// Applies the 2D metric to each pair and average-pools.
BranchScore score_branch(const std::array<ViewPair, 6>& pairs, const Metric2D& metric,
                         BranchId branch);

// Pools six externally computed view scores for one branch of a sample.
BranchScore score_branch_external(const ExternalScores& table, const std::string& sample_id,
                                  BranchId branch, const std::string& metric_name);

// Captures the intermediate view pairs of a run (CLI --dump-views).
struct ViewCapture {
  std::array<ViewPair, 6> reference_branch;
  std::array<ViewPair, 6> degraded_branch;
};

// The full two-branch metric: recolor, project, filter, crop, pad and score
// both geometry conditions, then fuse the pooled branch scores linearly.
// For external metrics the image pipeline is skipped and the scores come from
// `external` (required in that case). Both clouds must be voxelized at the
// same precision.
MetricReport jgc_projqm(const PointCloud& ref, const PointCloud& deg,
                        const Metric2D& metric, const FusionParams& fusion,
                        const PipelineConfig& config, const std::string& sample_id = "",
                        const ExternalScores* external = nullptr,
                        ViewCapture* capture = nullptr);

// JSON text of a report (fixed layout, stable key order).
std::string report_to_json(const MetricReport& report);

}  // namespace pcqa
