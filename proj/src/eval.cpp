#include "pcqa/eval.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>

#include "pcqa/error.hpp"
#include "pcqa/ply.hpp"
#include "pcqa/random.hpp"

namespace pcqa {

namespace {

const std::array<std::string, 6> kCodecTags = {
    "gpcc-octree-raht", "gpcc-octree-lifting", "gpcc-trisoup-raht",
    "gpcc-trisoup-lifting", "vpcc", "other"};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ls(line);
  while (std::getline(ls, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& text, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw InputError(where + ": not a number: '" + text + "'");
  }
}

std::string format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double mean_of(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

// Average ranks (1-based) with ties sharing the mean rank of their run.
std::vector<double> average_ranks(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return v[a] < v[b] || (v[a] == v[b] && a < b);
  });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && v[order[j]] == v[order[i]]) ++j;
    const double shared = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = shared;
    i = j;
  }
  return ranks;
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InputError("pearson: need two equal-length vectors of size >= 2");
  }
  const double mx = mean_of(x), my = mean_of(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw InputError("pearson: constant input vector");
  }
  return sxy / std::sqrt(sxx * syy);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InputError("spearman: need two equal-length vectors of size >= 2");
  }
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  return pearson(rx, ry);
}

double logistic_eval(const LogisticParams& p, double q) {
  return p.beta2 + (p.beta1 - p.beta2) / (1.0 + std::exp(-(q - p.beta3) / p.beta4));
}

FusionParams fit_fusion(std::span<const double> s_ref, std::span<const double> s_deg,
                        std::span<const double> mos) {
  const std::size_t n = s_ref.size();
  if (n != s_deg.size() || n != mos.size()) {
    throw InputError("fit_fusion: input vectors differ in length");
  }
  if (n < 2) throw InputError("fit_fusion: need at least 2 samples");

  Eigen::MatrixXd a(static_cast<Eigen::Index>(n), 2);
  Eigen::VectorXd b(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    a(static_cast<Eigen::Index>(i), 0) = s_ref[i];
    a(static_cast<Eigen::Index>(i), 1) = s_deg[i];
    b(static_cast<Eigen::Index>(i)) = mos[i];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < 2) {
    throw InputError("degenerate branch scores: fusion design matrix is rank deficient");
  }
  const Eigen::Vector2d x = qr.solve(b);
  return FusionParams{x(0), x(1)};
}

LogisticParams fit_logistic(std::span<const double> q, std::span<const double> mos) {
  const std::size_t n = q.size();
  if (n != mos.size()) throw InputError("fit_logistic: input vectors differ in length");
  if (n < 5) throw InputError("fit_logistic: need at least 5 samples");

  const auto [qmin_it, qmax_it] = std::minmax_element(q.begin(), q.end());
  if (*qmin_it == *qmax_it) {
    throw InputError("fit_logistic: constant objective scores");
  }

  LogisticParams p;
  p.beta1 = *std::max_element(mos.begin(), mos.end());
  p.beta2 = *std::min_element(mos.begin(), mos.end());
  {
    std::vector<double> sorted(q.begin(), q.end());
    std::sort(sorted.begin(), sorted.end());
    p.beta3 = n % 2 == 1 ? sorted[n / 2]
                         : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    const double mq = mean_of(q);
    double var = 0.0;
    for (double v : q) var += (v - mq) * (v - mq);
    p.beta4 = std::sqrt(var / static_cast<double>(n));
  }

  auto sse_of = [&](const LogisticParams& params) {
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = mos[i] - logistic_eval(params, q[i]);
      sse += r * r;
    }
    return sse;
  };

  double sse = sse_of(p);
  double lambda = 1e-3;
  constexpr int kMaxIterations = 500;
  constexpr double kRelTol = 1e-10;
  p.converged = sse == 0.0;

  for (int iter = 0; iter < kMaxIterations && !p.converged; ++iter) {
    Eigen::Matrix4d jtj = Eigen::Matrix4d::Zero();
    Eigen::Vector4d jtr = Eigen::Vector4d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
      const double z = (q[i] - p.beta3) / p.beta4;
      const double s = 1.0 / (1.0 + std::exp(-z));
      const double ds = s * (1.0 - s);
      Eigen::Vector4d g;                         // d(prediction)/d(beta)
      g(0) = s;                                  // beta1
      g(1) = 1.0 - s;                            // beta2
      g(2) = -(p.beta1 - p.beta2) * ds / p.beta4;          // beta3
      g(3) = -(p.beta1 - p.beta2) * ds * z / p.beta4;      // beta4
      const double r = mos[i] - logistic_eval(p, q[i]);
      jtj += g * g.transpose();
      jtr += g * r;
    }

    Eigen::Matrix4d damped = jtj;
    for (int d = 0; d < 4; ++d) {
      damped(d, d) += lambda * std::max(jtj(d, d), 1e-12);
    }
    const Eigen::Vector4d step = damped.ldlt().solve(jtr);

    LogisticParams cand = p;
    cand.beta1 += step(0);
    cand.beta2 += step(1);
    cand.beta3 += step(2);
    cand.beta4 += step(3);
    if (cand.beta4 == 0.0 || !std::isfinite(cand.beta4)) {
      lambda *= 10.0;
      continue;
    }
    const double cand_sse = sse_of(cand);
    if (!std::isfinite(cand_sse) || cand_sse > sse) {
      lambda *= 10.0;
      continue;
    }
    const double rel_drop = (sse - cand_sse) / std::max(sse, 1e-300);
    cand.converged = p.converged;
    p = cand;
    sse = cand_sse;
    lambda = std::max(lambda / 10.0, 1e-12);
    if (rel_drop < kRelTol || sse == 0.0) {
      p.converged = true;
      break;
    }
  }
  return p;
}

CorrelationStats correlations(std::span<const double> q, std::span<const double> mos,
                              const LogisticParams& logistic) {
  if (q.size() != mos.size() || q.size() < 2) {
    throw InputError("correlations: need two equal-length vectors of size >= 2");
  }
  std::vector<double> pred(q.size());
  double sq = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    pred[i] = logistic_eval(logistic, q[i]);
    const double d = pred[i] - mos[i];
    sq += d * d;
  }
  return CorrelationStats{pearson(pred, mos), spearman(q, mos),
                          std::sqrt(sq / static_cast<double>(q.size()))};
}

SplitCheckResult split_check(std::span<const double> s_ref, std::span<const double> s_deg,
                             std::span<const double> mos, int iterations,
                             double train_frac, std::uint64_t seed) {
  const std::size_t n = s_ref.size();
  if (n != s_deg.size() || n != mos.size()) {
    throw InputError("split_check: input vectors differ in length");
  }
  if (n < 8) throw InputError("split_check: need at least 8 samples");
  if (iterations < 1) throw InputError("split_check: iterations must be >= 1");
  if (!(train_frac > 0.0 && train_frac < 1.0)) {
    throw InputError("split_check: train fraction must lie in (0, 1)");
  }
  std::size_t n_train = static_cast<std::size_t>(
      std::llround(train_frac * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, 5, n - 2);

  SplitCheckResult result;
  result.per_iteration_plcc.reserve(static_cast<std::size_t>(iterations));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 rng(seed);

  std::vector<double> tr_ref(n_train), tr_deg(n_train), tr_mos(n_train), tr_q(n_train);
  const std::size_t n_test = n - n_train;
  std::vector<double> te_pred(n_test), te_mos(n_test);

  for (int it = 0; it < iterations; ++it) {
    deterministic_shuffle(order, rng);
    for (std::size_t i = 0; i < n_train; ++i) {
      tr_ref[i] = s_ref[order[i]];
      tr_deg[i] = s_deg[order[i]];
      tr_mos[i] = mos[order[i]];
    }
    const FusionParams fusion = fit_fusion(tr_ref, tr_deg, tr_mos);
    for (std::size_t i = 0; i < n_train; ++i) {
      tr_q[i] = fusion.alpha * tr_ref[i] + fusion.beta * tr_deg[i];
    }
    const LogisticParams logistic = fit_logistic(tr_q, tr_mos);
    for (std::size_t i = 0; i < n_test; ++i) {
      const std::size_t s = order[n_train + i];
      te_pred[i] = logistic_eval(logistic,
                                 fusion.alpha * s_ref[s] + fusion.beta * s_deg[s]);
      te_mos[i] = mos[s];
    }
    result.per_iteration_plcc.push_back(pearson(te_pred, te_mos));
  }
  result.mean_plcc = mean_of(result.per_iteration_plcc);

  const FusionParams fusion_all = fit_fusion(s_ref, s_deg, mos);
  std::vector<double> q_all(n);
  for (std::size_t i = 0; i < n; ++i) {
    q_all[i] = fusion_all.alpha * s_ref[i] + fusion_all.beta * s_deg[i];
  }
  const LogisticParams logistic_all = fit_logistic(q_all, mos);
  result.all_data_plcc = correlations(q_all, mos, logistic_all).plcc;
  return result;
}

Manifest Manifest::load(const std::string& path, double mos_min, double mos_max) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open manifest '" + path + "'");
  const std::filesystem::path base = std::filesystem::path(path).parent_path();

  Manifest manifest;
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& msg) -> InputError {
    return InputError(path + ":" + std::to_string(line_no) + ": " + msg);
  };

  if (!std::getline(in, line)) throw fail("empty manifest");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "sample_id,reference,degraded,mos,codec_tag") {
    throw fail("expected header sample_id,reference,degraded,mos,codec_tag");
  }

  auto resolve = [&](const std::string& p) {
    const std::filesystem::path fp(p);
    return fp.is_absolute() ? fp.string() : (base / fp).string();
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 5) throw fail("expected 5 comma-separated fields");
    DatasetSample s;
    s.sample_id = fields[0];
    s.reference_path = resolve(fields[1]);
    s.degraded_path = resolve(fields[2]);
    s.mos = parse_double(fields[3], path + ":" + std::to_string(line_no));
    s.codec_tag = fields[4];
    if (std::find(kCodecTags.begin(), kCodecTags.end(), s.codec_tag) == kCodecTags.end()) {
      throw fail("unknown codec_tag '" + s.codec_tag + "'");
    }
    if (s.mos < mos_min || s.mos > mos_max) {
      throw fail("mos " + format17(s.mos) + " outside [" + format17(mos_min) + ", " +
                 format17(mos_max) + "]");
    }
    manifest.samples.push_back(std::move(s));
  }
  if (manifest.samples.empty()) throw fail("manifest has no samples");
  return manifest;
}

std::vector<SampleScores> score_manifest(const Manifest& manifest, const Metric2D& metric,
                                         const EvalConfig& config,
                                         const ExternalScores* external) {
  std::vector<SampleScores> scores;
  scores.reserve(manifest.samples.size());
  for (const DatasetSample& sample : manifest.samples) {
    SampleScores s;
    s.sample_id = sample.sample_id;
    s.mos = sample.mos;
    s.codec_tag = sample.codec_tag;

    if (metric.is_external()) {
      if (!external) {
        throw InputError("metric '" + metric.name + "' needs an external score file");
      }
      s.s_ref = score_branch_external(*external, sample.sample_id, BranchId::kReference,
                                      metric.external_name)
                    .pooled;
      s.s_deg = score_branch_external(*external, sample.sample_id, BranchId::kDegraded,
                                      metric.external_name)
                    .pooled;
    } else {
      PointCloud ref = load_ply(sample.reference_path);
      PointCloud deg = load_ply(sample.degraded_path);
      const int p = config.precision > 0
                        ? config.precision
                        : std::max(infer_precision(ref), infer_precision(deg));
      ref = voxelize(ref, p);
      deg = voxelize(deg, p);
      const MetricReport report = jgc_projqm(ref, deg, metric, config.fusion,
                                             config.pipeline, sample.sample_id, external);
      s.s_ref = report.reference_branch.pooled;
      s.s_deg = report.degraded_branch.pooled;
    }
    scores.push_back(std::move(s));
  }
  return scores;
}

std::vector<CorrelationReport> evaluate_groups(const std::vector<SampleScores>& scores,
                                               bool fusion_per_group) {
  if (scores.empty()) throw InputError("no sample scores to evaluate");

  struct Group {
    std::string label;
    std::vector<double> s_ref, s_deg, mos;
  };
  std::array<Group, 3> groups{Group{"all", {}, {}, {}}, Group{"gpcc", {}, {}, {}},
                              Group{"vpcc", {}, {}, {}}};
  for (const SampleScores& s : scores) {
    auto push = [&](Group& g) {
      g.s_ref.push_back(s.s_ref);
      g.s_deg.push_back(s.s_deg);
      g.mos.push_back(s.mos);
    };
    push(groups[0]);
    if (s.codec_tag.rfind("gpcc", 0) == 0) push(groups[1]);
    if (s.codec_tag == "vpcc") push(groups[2]);
  }

  FusionParams fusion_all{};
  bool have_fusion_all = false;

  std::vector<CorrelationReport> reports;
  for (Group& g : groups) {
    if (g.mos.empty()) continue;
    if (g.mos.size() < 5) {
      throw InputError("group '" + g.label + "' has fewer than 5 samples (" +
                       std::to_string(g.mos.size()) + ")");
    }
    CorrelationReport report;
    report.group = g.label;
    report.n = static_cast<int>(g.mos.size());
    if (fusion_per_group) {
      report.fusion = fit_fusion(g.s_ref, g.s_deg, g.mos);
    } else {
      if (!have_fusion_all) {
        fusion_all = fit_fusion(groups[0].s_ref, groups[0].s_deg, groups[0].mos);
        have_fusion_all = true;
      }
      report.fusion = fusion_all;
    }
    std::vector<double> q(g.mos.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
      q[i] = report.fusion.alpha * g.s_ref[i] + report.fusion.beta * g.s_deg[i];
    }
    report.logistic = fit_logistic(q, g.mos);
    report.stats = correlations(q, g.mos, report.logistic);
    reports.push_back(std::move(report));
  }
  return reports;
}

std::vector<CorrelationReport> evaluate_dataset(const Manifest& manifest,
                                                const Metric2D& metric,
                                                const EvalConfig& config,
                                                const ExternalScores* external) {
  return evaluate_groups(score_manifest(manifest, metric, config, external),
                         config.fusion_per_group);
}

void write_score_cache(const std::vector<SampleScores>& scores, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write score cache '" + path + "'");
  out << "sample_id,branch,pooled_score\n";
  for (const SampleScores& s : scores) {
    out << s.sample_id << ",reference," << format17(s.s_ref) << "\n";
    out << s.sample_id << ",degraded," << format17(s.s_deg) << "\n";
  }
  if (!out) throw InputError("failed writing score cache '" + path + "'");
}

std::vector<SampleScores> read_score_cache(const std::string& path, const Manifest& manifest) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open score cache '" + path + "'");

  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& msg) -> InputError {
    return InputError(path + ":" + std::to_string(line_no) + ": " + msg);
  };
  if (!std::getline(in, line)) throw fail("empty score cache");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "sample_id,branch,pooled_score") {
    throw fail("expected header sample_id,branch,pooled_score");
  }

  std::map<std::string, std::pair<double, double>> by_sample;
  std::map<std::string, std::pair<bool, bool>> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3) throw fail("expected 3 comma-separated fields");
    const double score = parse_double(fields[2], path + ":" + std::to_string(line_no));
    auto& slot = by_sample[fields[0]];
    auto& flag = seen[fields[0]];
    if (fields[1] == "reference") {
      if (flag.first) throw fail("duplicate reference score for '" + fields[0] + "'");
      slot.first = score;
      flag.first = true;
    } else if (fields[1] == "degraded") {
      if (flag.second) throw fail("duplicate degraded score for '" + fields[0] + "'");
      slot.second = score;
      flag.second = true;
    } else {
      throw fail("unknown branch token '" + fields[1] + "'");
    }
  }

  std::vector<SampleScores> scores;
  scores.reserve(manifest.samples.size());
  for (const DatasetSample& sample : manifest.samples) {
    const auto it = by_sample.find(sample.sample_id);
    const auto fl = seen.find(sample.sample_id);
    if (it == by_sample.end() || !fl->second.first || !fl->second.second) {
      throw InputError("score cache '" + path + "' lacks both branch scores for sample '" +
                       sample.sample_id + "'");
    }
    scores.push_back(SampleScores{sample.sample_id, it->second.first, it->second.second,
                                  sample.mos, sample.codec_tag});
  }
  return scores;
}

std::string reports_to_json(const std::vector<CorrelationReport>& reports) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const CorrelationReport& r : reports) {
    nlohmann::ordered_json j;
    j["group"] = r.group;
    j["n"] = r.n;
    j["plcc"] = r.stats.plcc;
    j["srocc"] = r.stats.srocc;
    j["rmse"] = r.stats.rmse;
    j["fusion"] = {{"alpha", r.fusion.alpha}, {"beta", r.fusion.beta}};
    j["logistic"] = {{"beta1", r.logistic.beta1},
                     {"beta2", r.logistic.beta2},
                     {"beta3", r.logistic.beta3},
                     {"beta4", r.logistic.beta4},
                     {"converged", r.logistic.converged}};
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

}  // namespace pcqa
