#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pcqa/metrics2d.hpp"
#include "pcqa/pipeline.hpp"

namespace pcqa {

// One manifest row: a stimulus with its subjective score.
struct DatasetSample {
  std::string sample_id;
  std::string reference_path;
  std::string degraded_path;
  double mos = 0.0;
  std::string codec_tag;  // gpcc-octree-raht, gpcc-octree-lifting,
                          // gpcc-trisoup-raht, gpcc-trisoup-lifting, vpcc, other
};

struct Manifest {
  std::vector<DatasetSample> samples;

  // CSV with header sample_id,reference,degraded,mos,codec_tag. Relative
  // cloud paths resolve against the manifest's directory. MOS must lie in
  // [mos_min, mos_max].
  static Manifest load(const std::string& path, double mos_min = 1.0, double mos_max = 5.0);
};

// Four-parameter logistic mapping objective scores onto the MOS scale:
// beta2 + (beta1 - beta2) / (1 + exp(-(q - beta3) / beta4)).
struct LogisticParams {
  double beta1 = 0.0;
  double beta2 = 0.0;
  double beta3 = 0.0;
  double beta4 = 1.0;
  bool converged = true;
};

double logistic_eval(const LogisticParams& params, double q);

// Least-squares fit of mos ~ alpha * s_ref + beta * s_deg (no intercept).
// Throws when the design matrix is rank deficient.
FusionParams fit_fusion(std::span<const double> s_ref, std::span<const double> s_deg,
                        std::span<const double> mos);

// Levenberg-Marquardt fit of the logistic above. Initialization: beta1 =
// max(mos), beta2 = min(mos), beta3 = median(q), beta4 = std(q); stops when
// the relative SSE change drops below 1e-10 or after 500 iterations (the best
// iterate is returned with converged = false).
LogisticParams fit_logistic(std::span<const double> q, std::span<const double> mos);

struct CorrelationStats {
  double plcc;
  double srocc;
  double rmse;
};

// PLCC and RMSE between logistic-mapped predictions and MOS; SROCC on the raw
// scores (rank correlation is fitting-independent). Ties get average ranks.
CorrelationStats correlations(std::span<const double> q, std::span<const double> mos,
                              const LogisticParams& logistic);

// Standalone statistics (exposed for tests and reporting).
double pearson(std::span<const double> x, std::span<const double> y);
double spearman(std::span<const double> x, std::span<const double> y);

struct SplitCheckResult {
  std::vector<double> per_iteration_plcc;
  double mean_plcc = 0.0;
  double all_data_plcc = 0.0;
};

// Repeated random train/test splits of the (s_ref, s_deg, mos) triples:
// fusion and logistic parameters are fitted on the train split, PLCC is
// evaluated on the test split. Shuffling uses splitmix64, so a fixed seed
// reproduces the same iterations on any platform. Requires >= 8 samples.
SplitCheckResult split_check(std::span<const double> s_ref, std::span<const double> s_deg,
                             std::span<const double> mos, int iterations = 100,
                             double train_frac = 0.75, std::uint64_t seed = 0);

// Cached branch scores of one sample.
struct SampleScores {
  std::string sample_id;
  double s_ref = 0.0;
  double s_deg = 0.0;
  double mos = 0.0;
  std::string codec_tag;
};

struct EvalConfig {
  PipelineConfig pipeline;
  int precision = 0;         // 0 = infer per sample pair
  FusionParams fusion;       // used for the per-sample fused value in reports
  bool fusion_per_group = true;  // refit (alpha, beta) per codec group
};

// Scores every manifest sample through the two-branch pipeline (or the
// external table for external metrics) and returns the pooled branch scores.
std::vector<SampleScores> score_manifest(const Manifest& manifest, const Metric2D& metric,
                                         const EvalConfig& config,
                                         const ExternalScores* external = nullptr);

struct CorrelationReport {
  std::string group;  // all, gpcc, vpcc
  int n = 0;
  CorrelationStats stats{};
  FusionParams fusion{};
  LogisticParams logistic{};
};

// Fits fusion + logistic per codec group and reports PLCC/SROCC/RMSE. Groups
// without samples are omitted; groups with fewer than 5 samples fail.
std::vector<CorrelationReport> evaluate_groups(const std::vector<SampleScores>& scores,
                                               bool fusion_per_group = true);

// End-to-end: score the manifest, then evaluate per group.
std::vector<CorrelationReport> evaluate_dataset(const Manifest& manifest,
                                                const Metric2D& metric,
                                                const EvalConfig& config,
                                                const ExternalScores* external = nullptr);

// Score cache CSV (header sample_id,branch,pooled_score, floats with 17
// significant digits).
void write_score_cache(const std::vector<SampleScores>& scores, const std::string& path);
std::vector<SampleScores> read_score_cache(const std::string& path, const Manifest& manifest);

std::string reports_to_json(const std::vector<CorrelationReport>& reports);

}  // namespace pcqa
