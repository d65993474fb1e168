#pragma once

#include <map>
#include <string>
#include <tuple>

#include "pcqa/image.hpp"
#include "pcqa/projection.hpp"

namespace pcqa {

// BT.709 luminance on the [0, 255] scale.
LumaImage rgb_to_luma(const RgbImage& image);

// 10 log10(255^2 / MSE), capped at 100 dB so identical images (MSE 0) pool to
// a finite perfect score.
double y_psnr(const LumaImage& ref, const LumaImage& deg);

// Mean local SSIM: 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03,
// dynamic range 255, valid-region convolution. Requires min(H, W) >= 11.
double ssim(const LumaImage& ref, const LumaImage& deg);

// Multi-scale SSIM with the standard five scale weights (0.0448, 0.2856,
// 0.3001, 0.2363, 0.1333). Scales a crop cannot support are dropped and the
// remaining weights renormalized; images smaller than one window fail.
// Downsampling pads odd dimensions by edge reflection, then 2x2 mean-pools.
double ms_ssim(const LumaImage& ref, const LumaImage& deg);

// A 2D metric selected by name: "ypsnr", "ssim", "msssim" or
// "external:<name>" for scores imported from a CSV file.
struct Metric2D {
  std::string name;           // full spec string
  std::string external_name;  // empty for built-ins
  bool higher_is_better = true;

  bool is_external() const { return !external_name.empty(); }
};

Metric2D parse_metric(const std::string& spec);

// Evaluates a built-in metric; throws for external metrics.
double eval_metric(const Metric2D& metric, const LumaImage& ref, const LumaImage& deg);

// Per-view scores computed outside this toolkit, keyed by
// (sample_id, branch, plane, metric). CSV header:
// sample_id,branch,plane,metric,score with branch in {reference, degraded}
// and plane in {xy, xz, yz, xyp, xzp, yzp}.
class ExternalScores {
public:
  static ExternalScores load(const std::string& path);

  bool empty() const { return scores_.empty(); }

  // Throws InputError mentioning an incomplete view set when the key is
  // missing.
  double lookup(const std::string& sample_id, const std::string& branch,
                PlaneId plane, const std::string& metric) const;

private:
  using Key = std::tuple<std::string, std::string, int, std::string>;
  std::map<Key, double> scores_;
};

}  // namespace pcqa
