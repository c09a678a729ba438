#include "shortkit/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "shortkit/errors.hpp"
#include "shortkit/rng.hpp"

namespace shortkit::fairness {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kRidge = 1e-6;  // penalty on the standardized slope

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// Penalized Bernoulli log-likelihood on standardized x.
double lr_loglik(const std::vector<double>& z, const std::vector<int>& y, double b0, double b1) {
  double ll = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double eta = b0 + b1 * z[i];
    // log sigma(eta) if y=1, log(1-sigma(eta)) if y=0, via softplus
    const double softplus = eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
    ll += y[i] * eta - softplus;
  }
  return ll - 0.5 * kRidge * b1 * b1;
}

double smoothed_logit(double mean_y, std::size_t n) {
  const double p = std::clamp(mean_y, 1.0 / (static_cast<double>(n) + 1.0),
                              static_cast<double>(n) / (static_cast<double>(n) + 1.0));
  return std::log(p / (1.0 - p));
}

}  // namespace

LRFit fit_lr_1d(const std::vector<double>& x, const std::vector<int>& y) {
  if (x.size() != y.size()) throw InputError("fit_lr_1d: x and y length mismatch");
  const std::size_t n = x.size();
  if (n < 2) throw InputError("fit_lr_1d: need at least 2 observations");
  for (double v : x) {
    if (!std::isfinite(v)) throw InputError("fit_lr_1d: non-finite attribute value");
  }
  for (int v : y) {
    if (v != 0 && v != 1) throw InputError("fit_lr_1d: outcomes must be 0/1");
  }

  const double mean_y =
      std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);

  double mean_x = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  double var_x = 0.0;
  for (double v : x) var_x += (v - mean_x) * (v - mean_x);
  var_x /= static_cast<double>(n);
  const double sd_x = std::sqrt(var_x);

  LRFit fit;
  // Constant outcome or constant attribute: no slope to estimate.
  if (mean_y == 0.0 || mean_y == 1.0 || sd_x == 0.0) {
    fit.slope = 0.0;
    fit.intercept = smoothed_logit(mean_y, n);
    fit.converged = true;
    fit.degenerate = true;
    return fit;
  }

  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = (x[i] - mean_x) / sd_x;

  double b0 = smoothed_logit(mean_y, n);
  double b1 = 0.0;
  double ll = lr_loglik(z, y, b0, b1);

  const int max_iter = 100;
  const double tol = 1e-10;
  bool converged = false;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    double g0 = 0.0, g1 = -kRidge * b1;
    double h00 = 0.0, h01 = 0.0, h11 = kRidge;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(b0 + b1 * z[i]);
      const double r = y[i] - p;
      const double w = p * (1.0 - p);
      g0 += r;
      g1 += z[i] * r;
      h00 += w;
      h01 += z[i] * w;
      h11 += z[i] * z[i] * w;
    }
    const double det = h00 * h11 - h01 * h01;
    if (det <= 0.0 || !std::isfinite(det)) break;
    double d0 = (h11 * g0 - h01 * g1) / det;
    double d1 = (h00 * g1 - h01 * g0) / det;

    // backtrack if the Newton step overshoots
    double step = 1.0;
    double nb0 = b0 + d0, nb1 = b1 + d1;
    double nll = lr_loglik(z, y, nb0, nb1);
    int halvings = 0;
    while (nll < ll && halvings < 30) {
      step *= 0.5;
      nb0 = b0 + step * d0;
      nb1 = b1 + step * d1;
      nll = lr_loglik(z, y, nb0, nb1);
      ++halvings;
    }
    const double change = std::max(std::abs(nb0 - b0), std::abs(nb1 - b1));
    b0 = nb0;
    b1 = nb1;
    ll = nll;
    if (change < tol) {
      converged = true;
      ++iter;
      break;
    }
  }

  fit.slope = b1 / sd_x;
  fit.intercept = b0 - b1 * mean_x / sd_x;
  fit.converged = converged;
  fit.n_iterations = iter;
  return fit;
}

SeparationResult separation(const std::vector<int>& predictions, const std::vector<int>& labels,
                            const std::vector<double>& attribute) {
  if (predictions.size() != labels.size() || labels.size() != attribute.size())
    throw InputError("separation: length mismatch");

  std::vector<double> a_pos, a_neg;
  std::vector<int> pred_pos, pred_neg;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      a_pos.push_back(attribute[i]);
      pred_pos.push_back(predictions[i]);
    } else {
      a_neg.push_back(attribute[i]);
      pred_neg.push_back(predictions[i]);
    }
  }
  if (a_pos.size() < 2) throw MetricUndefinedError("separation: positive class absent");
  if (a_neg.size() < 2) throw MetricUndefinedError("separation: negative class absent");

  SeparationResult r;
  r.tpr_slope = fit_lr_1d(a_pos, pred_pos).slope;
  r.fpr_slope = fit_lr_1d(a_neg, pred_neg).slope;
  r.s = (std::abs(r.tpr_slope) + std::abs(r.fpr_slope)) / 2.0;
  return r;
}

double percent_change_per_delta(double s, double delta_a) {
  if (s < 0.0) throw InputError("percent_change_per_delta: s must be nonnegative");
  return std::exp(s * delta_a) - 1.0;
}

double independence(const std::vector<int>& predictions, const std::vector<double>& attribute) {
  return std::abs(fit_lr_1d(attribute, predictions).slope);
}

double sufficiency(const std::vector<int>& predictions, const std::vector<int>& labels,
                   const std::vector<double>& attribute) {
  if (predictions.size() != labels.size() || labels.size() != attribute.size())
    throw InputError("sufficiency: length mismatch");
  std::vector<double> a;
  std::vector<int> correct;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] == 1) {
      a.push_back(attribute[i]);
      correct.push_back(labels[i] == 1 ? 1 : 0);
    }
  }
  if (a.size() < 2) throw MetricUndefinedError("sufficiency: fewer than 2 positive predictions");
  return std::abs(fit_lr_1d(a, correct).slope);
}

MaxGapResult max_gap(const std::vector<double>& scores, const std::vector<int>& labels,
                     const std::vector<double>& attribute,
                     const std::vector<double>& bucket_edges) {
  if (scores.size() != labels.size() || labels.size() != attribute.size())
    throw InputError("max_gap: length mismatch");
  if (bucket_edges.size() < 3) throw InputError("max_gap: need at least 2 buckets");
  if (!std::is_sorted(bucket_edges.begin(), bucket_edges.end()))
    throw InputError("max_gap: bucket edges must be sorted");

  MaxGapResult result;
  const std::size_t n_buckets = bucket_edges.size() - 1;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  int valid = 0;
  for (std::size_t b = 0; b < n_buckets; ++b) {
    std::vector<double> s;
    std::vector<int> y;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (attribute[i] >= bucket_edges[b] && attribute[i] < bucket_edges[b + 1]) {
        s.push_back(scores[i]);
        y.push_back(labels[i]);
      }
    }
    const bool has_pos = std::find(y.begin(), y.end(), 1) != y.end();
    const bool has_neg = std::find(y.begin(), y.end(), 0) != y.end();
    if (!has_pos || !has_neg) {
      result.bucket_auroc.push_back(kNan);
      ++result.n_skipped;
      continue;
    }
    const double a = auroc(s, y);
    result.bucket_auroc.push_back(a);
    lo = std::min(lo, a);
    hi = std::max(hi, a);
    ++valid;
  }
  if (valid < 2)
    throw MetricUndefinedError("max_gap: fewer than 2 buckets contain both classes");
  result.gap = hi - lo;
  return result;
}

double equalized_odds(const std::vector<int>& predictions, const std::vector<int>& labels,
                      const std::vector<int>& group) {
  if (predictions.size() != labels.size() || labels.size() != group.size())
    throw InputError("equalized_odds: length mismatch");
  // [group][label] -> (positives predicted, total)
  std::int64_t pred_pos[2][2] = {{0, 0}, {0, 0}};
  std::int64_t total[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (group[i] != 0 && group[i] != 1) throw InputError("equalized_odds: group must be 0/1");
    total[group[i]][labels[i]]++;
    pred_pos[group[i]][labels[i]] += predictions[i] == 1 ? 1 : 0;
  }
  for (int g = 0; g < 2; ++g) {
    for (int c = 0; c < 2; ++c) {
      if (total[g][c] == 0)
        throw MetricUndefinedError("equalized_odds: group " + std::to_string(g) +
                                   " lacks label " + std::to_string(c));
    }
  }
  const double tpr0 = static_cast<double>(pred_pos[0][1]) / total[0][1];
  const double tpr1 = static_cast<double>(pred_pos[1][1]) / total[1][1];
  const double fpr0 = static_cast<double>(pred_pos[0][0]) / total[0][0];
  const double fpr1 = static_cast<double>(pred_pos[1][0]) / total[1][0];
  return std::max(std::abs(tpr0 - tpr1), std::abs(fpr0 - fpr1));
}

double auroc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw InputError("auroc: length mismatch");
  const std::size_t n = scores.size();
  std::int64_t n_pos = 0;
  for (int y : labels) n_pos += y == 1 ? 1 : 0;
  const std::int64_t n_neg = static_cast<std::int64_t>(n) - n_pos;
  if (n_pos == 0 || n_neg == 0) throw MetricUndefinedError("auroc: a class is absent");

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // mid-rank sum over positives
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[idx[j + 1]] == scores[idx[i]]) ++j;
    const double mid_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[idx[k]] == 1) rank_sum_pos += mid_rank;
    }
    i = j + 1;
  }
  const double u = rank_sum_pos - static_cast<double>(n_pos) * (n_pos + 1) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double max_f1_threshold(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw InputError("max_f1_threshold: length mismatch");
  if (scores.empty()) throw InputError("max_f1_threshold: empty input");
  std::int64_t n_pos = 0;
  for (int y : labels) n_pos += y == 1 ? 1 : 0;
  if (n_pos == 0) throw MetricUndefinedError("max_f1_threshold: no positive labels");

  std::vector<double> uniq(scores);
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());

  std::vector<double> candidates;
  candidates.push_back(uniq.front() - 1.0);  // predict everything positive
  for (std::size_t i = 0; i + 1 < uniq.size(); ++i)
    candidates.push_back((uniq[i] + uniq[i + 1]) / 2.0);

  double best_f1 = -1.0;
  double best_t = candidates.front();
  for (double t : candidates) {
    std::int64_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const bool pred = scores[i] >= t;
      if (pred && labels[i] == 1) ++tp;
      else if (pred && labels[i] == 0) ++fp;
      else if (!pred && labels[i] == 1) ++fn;
    }
    const double denom = 2.0 * tp + fp + fn;
    const double f1 = denom == 0.0 ? 0.0 : 2.0 * tp / denom;
    if (f1 > best_f1 || (f1 == best_f1 && t > best_t)) {
      best_f1 = f1;
      best_t = t;
    }
  }
  return best_t;
}

BootstrapCi bootstrap_ci(const std::function<double(const std::vector<int>&)>& statistic,
                         int n_examples, int n_resamples, double level, std::uint64_t seed) {
  if (n_examples <= 0) throw InputError("bootstrap_ci: no examples");
  if (n_resamples <= 0) throw InputError("bootstrap_ci: n_resamples must be positive");
  if (level <= 0.0 || level >= 1.0) throw InputError("bootstrap_ci: level must be in (0,1)");

  Rng rng(seed);
  BootstrapCi ci;
  std::vector<double> stats;
  stats.reserve(n_resamples);
  std::vector<int> indices(n_examples);
  const long max_attempts = 100L * n_resamples;
  long attempts = 0;
  while (static_cast<int>(stats.size()) < n_resamples) {
    if (++attempts > max_attempts)
      throw MetricUndefinedError("bootstrap_ci: statistic undefined on too many resamples");
    for (int i = 0; i < n_examples; ++i)
      indices[i] = static_cast<int>(rng.uniform_index(n_examples));
    const double s = statistic(indices);
    if (std::isnan(s)) {
      ++ci.n_redrawn;
      continue;
    }
    stats.push_back(s);
  }
  std::sort(stats.begin(), stats.end());
  const double tail = (1.0 - level) / 2.0;
  auto quantile = [&](double q) {
    const double pos = q * (stats.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, stats.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return stats[lo] * (1.0 - frac) + stats[hi] * frac;
  };
  ci.lo = quantile(tail);
  ci.hi = quantile(1.0 - tail);
  return ci;
}

const char* fairness_metric_name(FairnessMetric m) {
  switch (m) {
    case FairnessMetric::kSeparation: return "separation";
    case FairnessMetric::kIndependence: return "independence";
    case FairnessMetric::kSufficiency: return "sufficiency";
    case FairnessMetric::kEqualizedOdds: return "equalized_odds";
    case FairnessMetric::kMaxGap: return "max_gap";
  }
  return "separation";
}

FairnessMetric fairness_metric_from_name(const std::string& name) {
  if (name == "separation") return FairnessMetric::kSeparation;
  if (name == "independence") return FairnessMetric::kIndependence;
  if (name == "sufficiency") return FairnessMetric::kSufficiency;
  if (name == "equalized_odds") return FairnessMetric::kEqualizedOdds;
  if (name == "max_gap") return FairnessMetric::kMaxGap;
  throw ConfigError("unknown fairness metric: " + name);
}

double FairnessReport::metric(FairnessMetric m) const {
  switch (m) {
    case FairnessMetric::kSeparation: return separation_s;
    case FairnessMetric::kIndependence: return independence;
    case FairnessMetric::kSufficiency: return sufficiency;
    case FairnessMetric::kEqualizedOdds: return equalized_odds;
    case FairnessMetric::kMaxGap: return max_gap;
  }
  return separation_s;
}

FairnessReport compute_report(const std::vector<double>& scores, const std::vector<int>& labels,
                              const std::vector<double>& attribute, data::AttributeKind kind,
                              double threshold, const std::vector<double>& bucket_edges) {
  FairnessReport rep;
  rep.threshold = threshold;
  rep.clinical_auc = auroc(scores, labels);

  std::vector<int> preds(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) preds[i] = scores[i] >= threshold ? 1 : 0;

  try {
    const auto sep = separation(preds, labels, attribute);
    rep.separation_s = sep.s;
    rep.tpr_slope = sep.tpr_slope;
    rep.fpr_slope = sep.fpr_slope;
  } catch (const MetricUndefinedError&) {
    rep.separation_s = rep.tpr_slope = rep.fpr_slope = kNan;
  }
  try {
    rep.independence = independence(preds, attribute);
  } catch (const MetricUndefinedError&) {
    rep.independence = kNan;
  }
  try {
    rep.sufficiency = sufficiency(preds, labels, attribute);
  } catch (const MetricUndefinedError&) {
    rep.sufficiency = kNan;
  }
  if (kind == data::AttributeKind::kBinary) {
    std::vector<int> group(attribute.size());
    for (std::size_t i = 0; i < attribute.size(); ++i) group[i] = attribute[i] >= 0.5 ? 1 : 0;
    try {
      rep.equalized_odds = equalized_odds(preds, labels, group);
    } catch (const MetricUndefinedError&) {
      rep.equalized_odds = kNan;
    }
  } else {
    rep.equalized_odds = kNan;
  }
  try {
    std::vector<double> edges = bucket_edges;
    if (edges.empty()) {
      if (kind == data::AttributeKind::kBinary) {
        edges = {-0.5, 0.5, 1.5};
      } else {
        const auto [mn, mx] = std::minmax_element(attribute.begin(), attribute.end());
        const double lo = *mn, hi = *mx;
        const double w = (hi - lo) / 4.0;
        edges = {lo, lo + w, lo + 2 * w, lo + 3 * w,
                 std::nextafter(hi, std::numeric_limits<double>::infinity())};
      }
    }
    rep.max_gap = max_gap(scores, labels, attribute, edges).gap;
  } catch (const MetricUndefinedError&) {
    rep.max_gap = kNan;
  } catch (const InputError&) {
    rep.max_gap = kNan;
  }
  return rep;
}

}  // namespace shortkit::fairness
