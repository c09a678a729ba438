#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "shortkit/dataset.hpp"

namespace shortkit::fairness {

struct LRFit {
  double intercept = 0.0;
  double slope = 0.0;  // per attribute unit
  bool converged = false;
  int n_iterations = 0;
  bool degenerate = false;  // constant outcome or constant x
};

/// Univariate logistic regression by Newton-Raphson on the ridge-penalized
/// log-likelihood (penalty 1e-6 on the standardized slope). x is standardized
/// internally; the reported slope is per original attribute unit.
LRFit fit_lr_1d(const std::vector<double>& x, const std::vector<int>& y);

struct SeparationResult {
  double s = 0.0;  // (|tpr_slope| + |fpr_slope|) / 2
  double tpr_slope = 0.0;
  double fpr_slope = 0.0;
};

/// LR slope of the positive-prediction rate against the attribute, fitted
/// separately within each label class (TPR and FPR as functions of A).
SeparationResult separation(const std::vector<int>& predictions, const std::vector<int>& labels,
                            const std::vector<double>& attribute);

/// Fractional performance change over an attribute difference: e^{s*da} - 1.
double percent_change_per_delta(double s, double delta_a);

/// |LR slope| of the binarized prediction against the attribute.
double independence(const std::vector<int>& predictions, const std::vector<double>& attribute);

/// |LR slope| of correctness among predicted positives against the attribute
/// (PPV as a function of A). Requires at least 2 positive predictions.
double sufficiency(const std::vector<int>& predictions, const std::vector<int>& labels,
                   const std::vector<double>& attribute);

struct MaxGapResult {
  double gap = 0.0;
  std::vector<double> bucket_auroc;  // NaN for skipped buckets
  int n_skipped = 0;
};

/// Max minus min per-bucket AUROC over attribute buckets [e0,e1), [e1,e2), ...
/// Buckets lacking both classes are skipped; at least two must remain.
MaxGapResult max_gap(const std::vector<double>& scores, const std::vector<int>& labels,
                     const std::vector<double>& attribute, const std::vector<double>& bucket_edges);

/// max(|TPR0-TPR1|, |FPR0-FPR1|) for a binary group attribute.
double equalized_odds(const std::vector<int>& predictions, const std::vector<int>& labels,
                      const std::vector<int>& group);

/// Mann-Whitney AUROC; ties contribute 1/2.
double auroc(const std::vector<double>& scores, const std::vector<int>& labels);

/// Threshold maximizing F1, chosen among midpoints of adjacent sorted unique
/// scores plus a predict-all-positive sentinel below the minimum. Ties break
/// toward the higher threshold. Predictions are score >= threshold.
double max_f1_threshold(const std::vector<double>& scores, const std::vector<int>& labels);

/// Percentile bootstrap over example indices. The statistic receives a
/// resampled index multiset and may return NaN to signal it is undefined on
/// that resample; such resamples are redrawn and counted.
struct BootstrapCi {
  double lo = 0.0, hi = 0.0;
  int n_redrawn = 0;
};
BootstrapCi bootstrap_ci(const std::function<double(const std::vector<int>&)>& statistic,
                         int n_examples, int n_resamples, double level, std::uint64_t seed);

enum class FairnessMetric { kSeparation, kIndependence, kSufficiency, kEqualizedOdds, kMaxGap };

const char* fairness_metric_name(FairnessMetric m);
FairnessMetric fairness_metric_from_name(const std::string& name);

/// All fairness metrics for one model's binarized test predictions.
/// Metrics whose preconditions fail on this data are NaN.
struct FairnessReport {
  double separation_s = 0.0;
  double tpr_slope = 0.0;
  double fpr_slope = 0.0;
  double independence = 0.0;
  double sufficiency = 0.0;
  double equalized_odds = 0.0;  // binary A only, else NaN
  double max_gap = 0.0;
  double clinical_auc = 0.0;
  double threshold = 0.0;

  double metric(FairnessMetric m) const;
};

FairnessReport compute_report(const std::vector<double>& scores, const std::vector<int>& labels,
                              const std::vector<double>& attribute, data::AttributeKind kind,
                              double threshold, const std::vector<double>& bucket_edges);

}  // namespace shortkit::fairness
