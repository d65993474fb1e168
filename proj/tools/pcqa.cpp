// pcqa: projection-based point cloud quality assessment CLI.
//
// Subcommands: score (single pair), batch (manifest -> score cache), fit
// (correlation report per codec group), splitcheck (train/test overfitting
// check), baseline (point-based metrics). Exit codes: 0 success, 2 input
// error, 3 internal invariant violation. PCQA_THREADS caps the worker count.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <string>

#include "pcqa/baseline.hpp"
#include "pcqa/error.hpp"
#include "pcqa/eval.hpp"
#include "pcqa/pipeline.hpp"
#include "pcqa/ply.hpp"
#include "pcqa/view_dump.hpp"

namespace {

struct CommonFlags {
  int precision = 0;  // 0 = infer
  int tau = 20;
  int window = 5;
  std::string external_scores;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--precision", flags.precision,
                  "Voxel precision in bits; inferred from the data when omitted")
      ->check(CLI::Range(1, pcqa::kMaxPrecision));
  cmd->add_option("--tau", flags.tau, "Occlusion filter threshold")
      ->default_val(20)
      ->check(CLI::PositiveNumber);
  cmd->add_option("--window", flags.window, "Occlusion filter window (odd, >= 3)")
      ->default_val(5);
  cmd->add_option("--external-scores", flags.external_scores,
                  "CSV of externally computed per-view scores "
                  "(sample_id,branch,plane,metric,score)");
}

void validate_window(int window) {
  if (window < 3 || window % 2 == 0) {
    throw pcqa::InputError("--window must be odd and >= 3");
  }
}

// Loads and voxelizes a reference/degraded pair at a shared precision.
std::pair<pcqa::PointCloud, pcqa::PointCloud> load_pair(const std::string& ref_path,
                                                        const std::string& deg_path,
                                                        int precision) {
  pcqa::PointCloud ref = pcqa::load_ply(ref_path);
  pcqa::PointCloud deg = pcqa::load_ply(deg_path);
  const int p = precision > 0 ? precision
                              : std::max(pcqa::infer_precision(ref),
                                         pcqa::infer_precision(deg));
  return {pcqa::voxelize(ref, p), pcqa::voxelize(deg, p)};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw pcqa::InputError("cannot write '" + path + "'");
  out << text;
  if (!out) throw pcqa::InputError("failed writing '" + path + "'");
}

void dump_views(const pcqa::ViewCapture& capture, const std::string& dir,
                const std::string& sample_id) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto dump_branch = [&](const std::array<pcqa::ViewPair, 6>& pairs, const char* branch) {
    for (const pcqa::ViewPair& pair : pairs) {
      const std::string stem =
          sample_id + "_" + branch + "_";
      const std::string plane = pcqa::to_string(pair.plane);
      pcqa::write_png(pair.reference_image, (fs::path(dir) / (stem + "refcol_" + plane + ".png")).string());
      pcqa::write_png(pair.degraded_image, (fs::path(dir) / (stem + "degcol_" + plane + ".png")).string());
      pcqa::write_pgm(pair.occupancy, (fs::path(dir) / (stem + "refcol_" + plane + ".pgm")).string());
      pcqa::write_pgm(pair.occupancy, (fs::path(dir) / (stem + "degcol_" + plane + ".pgm")).string());
    }
  };
  dump_branch(capture.reference_branch, "reference");
  dump_branch(capture.degraded_branch, "degraded");
}

int run(int argc, char** argv) {
  CLI::App app{"Joint geometry and color projection-based point cloud quality metric"};
  app.require_subcommand(1);

  // score
  auto* score = app.add_subcommand("score", "Score one reference/degraded pair");
  std::string score_ref, score_deg, score_metric = "ssim", score_out, score_dump;
  std::string score_sample_id;
  double score_alpha = 0.5, score_beta = 0.5;
  CommonFlags score_flags;
  score->add_option("--reference", score_ref, "Reference PLY")->required();
  score->add_option("--degraded", score_deg, "Degraded PLY")->required();
  score->add_option("--metric", score_metric,
                    "2D metric: ypsnr, ssim, msssim or external:<name>")
      ->default_val("ssim");
  score->add_option("--alpha", score_alpha, "Fusion weight of the reference branch")
      ->default_val(0.5);
  score->add_option("--beta", score_beta, "Fusion weight of the degraded branch")
      ->default_val(0.5);
  score->add_option("--sample-id", score_sample_id,
                    "Sample id used in the report and external score lookup "
                    "(default: degraded file stem)");
  score->add_option("--dump-views", score_dump,
                    "Directory for the 24 padded view PNGs and occupancy PGMs");
  score->add_option("--out", score_out, "Report JSON path")->required();
  add_common_flags(score, score_flags);

  // batch
  auto* batch = app.add_subcommand("batch", "Score a manifest into a score cache CSV");
  std::string batch_manifest, batch_metric = "ssim", batch_out;
  CommonFlags batch_flags;
  batch->add_option("--manifest", batch_manifest,
                    "CSV: sample_id,reference,degraded,mos,codec_tag")
      ->required();
  batch->add_option("--metric", batch_metric, "2D metric")->default_val("ssim");
  batch->add_option("--out", batch_out, "Score cache CSV path")->required();
  add_common_flags(batch, batch_flags);

  // fit
  auto* fit = app.add_subcommand("fit", "Fit fusion + logistic and report correlations");
  std::string fit_manifest, fit_scores, fit_out;
  bool fit_fusion_from_all = false;
  fit->add_option("--manifest", fit_manifest, "Manifest CSV")->required();
  fit->add_option("--scores", fit_scores, "Score cache CSV from 'batch'")->required();
  fit->add_option("--out", fit_out, "Correlation report JSON path")->required();
  fit->add_flag("--fusion-from-all", fit_fusion_from_all,
                "Reuse the all-data fusion weights for the codec groups instead "
                "of refitting per group");

  // splitcheck
  auto* splitcheck =
      app.add_subcommand("splitcheck", "Repeated train/test split overfitting check");
  std::string sc_manifest, sc_scores, sc_out;
  int sc_iterations = 100;
  double sc_train_frac = 0.75;
  std::uint64_t sc_seed = 1;
  splitcheck->add_option("--manifest", sc_manifest, "Manifest CSV")->required();
  splitcheck->add_option("--scores", sc_scores, "Score cache CSV from 'batch'")->required();
  splitcheck->add_option("--iterations", sc_iterations, "Number of random splits")
      ->default_val(100)
      ->check(CLI::PositiveNumber);
  splitcheck->add_option("--train-frac", sc_train_frac, "Training fraction")
      ->default_val(0.75);
  splitcheck->add_option("--seed", sc_seed, "64-bit shuffle seed (splitmix64)")
      ->default_val(1);
  splitcheck->add_option("--out", sc_out, "Per-iteration PLCC CSV path")->required();

  // baseline
  auto* baseline = app.add_subcommand("baseline", "Point-based baseline metrics");
  std::string bl_ref, bl_deg, bl_metric, bl_out, bl_peak = "diag";
  int bl_precision = 0;
  int bl_normals_k = 16;
  bool bl_no_estimate = false;
  baseline->add_option("--reference", bl_ref, "Reference PLY")->required();
  baseline->add_option("--degraded", bl_deg, "Degraded PLY")->required();
  baseline->add_option("--metric", bl_metric, "d1, d2, hausdorff or ypsnr-point")
      ->required()
      ->check(CLI::IsMember({"d1", "d2", "hausdorff", "ypsnr-point"}));
  baseline->add_option("--precision", bl_precision, "Voxel precision in bits")
      ->check(CLI::Range(1, pcqa::kMaxPrecision));
  baseline->add_option("--geometry-peak", bl_peak,
                       "PSNR peak: diag = 3*(2^p-1)^2, axis = (2^p-1)^2")
      ->default_val("diag")
      ->check(CLI::IsMember({"diag", "axis"}));
  baseline->add_option("--normals-k", bl_normals_k, "Neighborhood size for normal estimation")
      ->default_val(16);
  baseline->add_flag("--no-normal-estimation", bl_no_estimate,
                     "Fail instead of estimating normals when the reference has none");
  baseline->add_option("--out", bl_out, "Optional JSON output path (stdout otherwise)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version exit 0; every other parse problem is input error.
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (score->parsed()) {
    validate_window(score_flags.window);
    const pcqa::Metric2D metric = pcqa::parse_metric(score_metric);
    pcqa::ExternalScores external;
    if (!score_flags.external_scores.empty()) {
      external = pcqa::ExternalScores::load(score_flags.external_scores);
    } else if (metric.is_external()) {
      throw pcqa::InputError("metric '" + score_metric + "' needs --external-scores");
    }
    if (score_sample_id.empty()) {
      score_sample_id = std::filesystem::path(score_deg).stem().string();
    }

    auto [ref, deg] = load_pair(score_ref, score_deg, score_flags.precision);
    pcqa::PipelineConfig config{score_flags.tau, score_flags.window};
    pcqa::FusionParams fusion{score_alpha, score_beta};
    pcqa::ViewCapture capture;
    const pcqa::MetricReport report = pcqa::jgc_projqm(
        ref, deg, metric, fusion, config, score_sample_id,
        metric.is_external() ? &external : nullptr,
        score_dump.empty() || metric.is_external() ? nullptr : &capture);
    if (!score_dump.empty() && !metric.is_external()) {
      dump_views(capture, score_dump, score_sample_id);
    }
    write_text(score_out, pcqa::report_to_json(report));
    std::printf("fused %s score: %.6f\n", report.metric.c_str(), report.fused);
    return 0;
  }

  if (batch->parsed()) {
    validate_window(batch_flags.window);
    const pcqa::Metric2D metric = pcqa::parse_metric(batch_metric);
    pcqa::ExternalScores external;
    const bool have_external = !batch_flags.external_scores.empty();
    if (have_external) external = pcqa::ExternalScores::load(batch_flags.external_scores);
    if (metric.is_external() && !have_external) {
      throw pcqa::InputError("metric '" + batch_metric + "' needs --external-scores");
    }

    const pcqa::Manifest manifest = pcqa::Manifest::load(batch_manifest);
    pcqa::EvalConfig config;
    config.pipeline = pcqa::PipelineConfig{batch_flags.tau, batch_flags.window};
    config.precision = batch_flags.precision;
    const auto scores = pcqa::score_manifest(manifest, metric, config,
                                             have_external ? &external : nullptr);
    pcqa::write_score_cache(scores, batch_out);
    std::fprintf(stderr, "scored %zu samples -> %s\n", scores.size(), batch_out.c_str());
    return 0;
  }

  if (fit->parsed()) {
    const pcqa::Manifest manifest = pcqa::Manifest::load(fit_manifest);
    const auto scores = pcqa::read_score_cache(fit_scores, manifest);
    const auto reports = pcqa::evaluate_groups(scores, !fit_fusion_from_all);
    write_text(fit_out, pcqa::reports_to_json(reports));
    for (const pcqa::CorrelationReport& r : reports) {
      std::printf("%-5s n=%-4d plcc=%.4f srocc=%.4f rmse=%.4f\n", r.group.c_str(), r.n,
                  r.stats.plcc, r.stats.srocc, r.stats.rmse);
    }
    return 0;
  }

  if (splitcheck->parsed()) {
    const pcqa::Manifest manifest = pcqa::Manifest::load(sc_manifest);
    const auto scores = pcqa::read_score_cache(sc_scores, manifest);
    std::vector<double> s_ref, s_deg, mos;
    for (const pcqa::SampleScores& s : scores) {
      s_ref.push_back(s.s_ref);
      s_deg.push_back(s.s_deg);
      mos.push_back(s.mos);
    }
    const pcqa::SplitCheckResult result =
        pcqa::split_check(s_ref, s_deg, mos, sc_iterations, sc_train_frac, sc_seed);

    std::string csv = "iteration,test_plcc\n";
    char buf[64];
    for (std::size_t i = 0; i < result.per_iteration_plcc.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i + 1, result.per_iteration_plcc[i]);
      csv += buf;
    }
    std::snprintf(buf, sizeof buf, "mean,%.17g\n", result.mean_plcc);
    csv += buf;
    std::snprintf(buf, sizeof buf, "all_data,%.17g\n", result.all_data_plcc);
    csv += buf;
    write_text(sc_out, csv);
    std::printf("mean test plcc %.6f, all-data plcc %.6f\n", result.mean_plcc,
                result.all_data_plcc);
    return 0;
  }

  if (baseline->parsed()) {
    auto [ref, deg] = load_pair(bl_ref, bl_deg, bl_precision);
    const pcqa::GeometryPeak peak =
        bl_peak == "axis" ? pcqa::GeometryPeak::kAxis : pcqa::GeometryPeak::kBoxDiagonal;

    nlohmann::ordered_json j;
    j["metric"] = bl_metric;
    j["precision"] = ref.precision;
    if (bl_metric == "d1" || bl_metric == "d2" || bl_metric == "ypsnr-point") {
      pcqa::SymmetricResult r{};
      if (bl_metric == "d1") {
        r = pcqa::d1(ref, deg, peak);
      } else if (bl_metric == "d2") {
        pcqa::D2Options options;
        options.estimate_when_missing = !bl_no_estimate;
        options.estimation_k = bl_normals_k;
        options.peak = peak;
        r = pcqa::d2(ref, deg, options);
      } else {
        r = pcqa::point_y_psnr(ref, deg);
      }
      j["mse_forward"] = r.mse_forward;
      j["mse_backward"] = r.mse_backward;
      j["mse_symmetric"] = r.mse_symmetric;
      j["psnr"] = r.psnr;
    } else {
      const pcqa::HausdorffResult r = pcqa::hausdorff_po2po(ref, deg);
      j["forward"] = r.forward;
      j["backward"] = r.backward;
      j["symmetric"] = r.symmetric;
    }
    const std::string text = j.dump(2) + "\n";
    if (bl_out.empty()) {
      std::fputs(text.c_str(), stdout);
    } else {
      write_text(bl_out, text);
    }
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const pcqa::InternalError& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 3;
  } catch (const pcqa::InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 3;
  }
}
