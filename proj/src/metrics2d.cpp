#include "pcqa/metrics2d.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "pcqa/error.hpp"

namespace pcqa {

LumaImage rgb_to_luma(const RgbImage& image) {
  LumaImage out(image.rows, image.cols, 0.0);
  for (std::size_t i = 0; i < image.px.size(); ++i) {
    const Rgb8& c = image.px[i];
    out.data[i] = 0.2126 * c[0] + 0.7152 * c[1] + 0.0722 * c[2];
  }
  return out;
}

double y_psnr(const LumaImage& ref, const LumaImage& deg) {
  if (!ref.same_shape_as(deg)) throw InputError("y_psnr: image shapes differ");
  if (ref.data.empty()) throw InputError("y_psnr: empty image");
  double sq = 0.0;
  for (std::size_t i = 0; i < ref.data.size(); ++i) {
    const double d = ref.data[i] - deg.data[i];
    sq += d * d;
  }
  const double mse = sq / static_cast<double>(ref.data.size());
  if (mse == 0.0) return 100.0;
  return std::min(100.0, 10.0 * std::log10(255.0 * 255.0 / mse));
}

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = (0.01 * 255.0) * (0.01 * 255.0);
constexpr double kC2 = (0.03 * 255.0) * (0.03 * 255.0);

const std::array<double, kWindow>& gaussian_taps() {
  static const std::array<double, kWindow> taps = [] {
    std::array<double, kWindow> t{};
    double sum = 0.0;
    for (int i = 0; i < kWindow; ++i) {
      const double x = i - (kWindow - 1) / 2.0;
      t[i] = std::exp(-0.5 * x * x / (kSigma * kSigma));
      sum += t[i];
    }
    for (double& v : t) v /= sum;
    return t;
  }();
  return taps;
}

// Separable valid-region Gaussian filter; output is (rows-10) x (cols-10).
LumaImage gauss_valid(const LumaImage& in) {
  const auto& taps = gaussian_taps();
  LumaImage mid(in.rows, in.cols - kWindow + 1, 0.0);
  for (int r = 0; r < in.rows; ++r) {
    for (int c = 0; c < mid.cols; ++c) {
      double acc = 0.0;
      for (int t = 0; t < kWindow; ++t) acc += taps[t] * in.at(r, c + t);
      mid.at(r, c) = acc;
    }
  }
  LumaImage out(in.rows - kWindow + 1, mid.cols, 0.0);
  for (int r = 0; r < out.rows; ++r) {
    for (int c = 0; c < out.cols; ++c) {
      double acc = 0.0;
      for (int t = 0; t < kWindow; ++t) acc += taps[t] * mid.at(r + t, c);
      out.at(r, c) = acc;
    }
  }
  return out;
}

struct SsimStats {
  double mean_ssim;
  double mean_cs;
};

SsimStats ssim_stats(const LumaImage& x, const LumaImage& y) {
  const std::size_t n = x.data.size();
  LumaImage xx(x.rows, x.cols), yy(x.rows, x.cols), xy(x.rows, x.cols);
  for (std::size_t i = 0; i < n; ++i) {
    xx.data[i] = x.data[i] * x.data[i];
    yy.data[i] = y.data[i] * y.data[i];
    xy.data[i] = x.data[i] * y.data[i];
  }
  const LumaImage mu_x = gauss_valid(x);
  const LumaImage mu_y = gauss_valid(y);
  const LumaImage s_xx = gauss_valid(xx);
  const LumaImage s_yy = gauss_valid(yy);
  const LumaImage s_xy = gauss_valid(xy);

  double sum_ssim = 0.0, sum_cs = 0.0;
  for (std::size_t i = 0; i < mu_x.data.size(); ++i) {
    const double mx = mu_x.data[i], my = mu_y.data[i];
    const double var_x = s_xx.data[i] - mx * mx;
    const double var_y = s_yy.data[i] - my * my;
    const double cov = s_xy.data[i] - mx * my;
    const double lum = (2.0 * mx * my + kC1) / (mx * mx + my * my + kC1);
    const double cs = (2.0 * cov + kC2) / (var_x + var_y + kC2);
    sum_ssim += lum * cs;
    sum_cs += cs;
  }
  const double count = static_cast<double>(mu_x.data.size());
  return SsimStats{sum_ssim / count, sum_cs / count};
}

// 2x2 mean pool; odd dimensions are padded by repeating the edge row/column.
LumaImage downsample2(const LumaImage& in) {
  const int rows = (in.rows + 1) / 2;
  const int cols = (in.cols + 1) / 2;
  LumaImage out(rows, cols, 0.0);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int r1 = std::min(2 * r + 1, in.rows - 1);
      const int c1 = std::min(2 * c + 1, in.cols - 1);
      out.at(r, c) = 0.25 * (in.at(2 * r, 2 * c) + in.at(2 * r, c1) +
                             in.at(r1, 2 * c) + in.at(r1, c1));
    }
  }
  return out;
}

void require_ssim_size(const LumaImage& ref, const LumaImage& deg) {
  if (!ref.same_shape_as(deg)) throw InputError("ssim: image shapes differ");
  if (ref.rows < kWindow || ref.cols < kWindow) {
    throw InputError("ssim: image smaller than the 11x11 window");
  }
}

}  // namespace

double ssim(const LumaImage& ref, const LumaImage& deg) {
  require_ssim_size(ref, deg);
  return ssim_stats(ref, deg).mean_ssim;
}

double ms_ssim(const LumaImage& ref, const LumaImage& deg) {
  require_ssim_size(ref, deg);
  static constexpr std::array<double, 5> kWeights = {0.0448, 0.2856, 0.3001,
                                                     0.2363, 0.1333};

  // Number of scales the crop supports, at most five.
  int scales = 1;
  {
    int r = ref.rows, c = ref.cols;
    while (scales < 5) {
      r = (r + 1) / 2;
      c = (c + 1) / 2;
      if (r < kWindow || c < kWindow) break;
      ++scales;
    }
  }
  double weight_sum = 0.0;
  for (int s = 0; s < scales; ++s) weight_sum += kWeights[s];

  LumaImage x = ref, y = deg;
  double score = 1.0;
  for (int s = 0; s < scales; ++s) {
    const SsimStats st = ssim_stats(x, y);
    // cs on intermediate scales, the full (luminance * cs) product on the
    // coarsest; negative terms clamp to zero rather than feeding pow a
    // negative base.
    const double term = std::max(s + 1 == scales ? st.mean_ssim : st.mean_cs, 0.0);
    score *= std::pow(term, kWeights[s] / weight_sum);
    if (s + 1 < scales) {
      x = downsample2(x);
      y = downsample2(y);
    }
  }
  return score;
}

Metric2D parse_metric(const std::string& spec) {
  Metric2D m;
  m.name = spec;
  if (spec == "ypsnr" || spec == "ssim" || spec == "msssim") return m;
  if (spec.rfind("external:", 0) == 0 && spec.size() > 9) {
    m.external_name = spec.substr(9);
    return m;
  }
  throw InputError("unknown metric '" + spec +
                   "' (expected ypsnr, ssim, msssim or external:<name>)");
}

double eval_metric(const Metric2D& metric, const LumaImage& ref, const LumaImage& deg) {
  if (metric.is_external()) {
    throw InternalError("external metric '" + metric.name + "' cannot be computed locally");
  }
  if (metric.name == "ypsnr") return y_psnr(ref, deg);
  if (metric.name == "ssim") return ssim(ref, deg);
  if (metric.name == "msssim") return ms_ssim(ref, deg);
  throw InternalError("unhandled metric '" + metric.name + "'");
}

ExternalScores ExternalScores::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open external score file '" + path + "'");

  ExternalScores table;
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& msg) -> InputError {
    return InputError(path + ":" + std::to_string(line_no) + ": " + msg);
  };

  if (!std::getline(in, line)) throw fail("empty file");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "sample_id,branch,plane,metric,score") {
    throw fail("expected header sample_id,branch,plane,metric,score");
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string sample, branch, plane, metric, score_text;
    if (!std::getline(ls, sample, ',') || !std::getline(ls, branch, ',') ||
        !std::getline(ls, plane, ',') || !std::getline(ls, metric, ',') ||
        !std::getline(ls, score_text)) {
      throw fail("expected 5 comma-separated fields");
    }
    if (branch != "reference" && branch != "degraded") {
      throw fail("unknown branch token '" + branch + "'");
    }
    PlaneId plane_id;
    try {
      plane_id = parse_plane(plane);
    } catch (const InputError&) {
      throw fail("unknown plane token '" + plane + "'");
    }
    double score;
    try {
      std::size_t used = 0;
      score = std::stod(score_text, &used);
      if (used != score_text.size()) throw std::invalid_argument("trailing junk");
    } catch (const std::exception&) {
      throw fail("non-numeric score '" + score_text + "'");
    }
    const Key key{sample, branch, static_cast<int>(plane_id), metric};
    if (!table.scores_.emplace(key, score).second) {
      throw fail("duplicate score row for (" + sample + ", " + branch + ", " +
                 plane + ", " + metric + ")");
    }
  }
  return table;
}

double ExternalScores::lookup(const std::string& sample_id, const std::string& branch,
                              PlaneId plane, const std::string& metric) const {
  const Key key{sample_id, branch, static_cast<int>(plane), metric};
  const auto it = scores_.find(key);
  if (it == scores_.end()) {
    throw InputError("incomplete view set: no external score for (" + sample_id +
                     ", " + branch + ", " + to_string(plane) + ", " + metric + ")");
  }
  return it->second;
}

}  // namespace pcqa
