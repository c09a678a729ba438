#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "shortkit/datagen.hpp"
#include "shortkit/fairness.hpp"
#include "shortkit/nn.hpp"
#include "shortkit/probes.hpp"

namespace shortkit::analysis {

using fairness::FairnessMetric;

/// Symmetric lambda grid: (n-1)/2 log-spaced magnitudes per sign spanning
/// `decades` decades below `magnitude`, plus exact zero. n must be odd.
std::vector<double> make_lambda_grid(int n = 25, double magnitude = 0.1, double decades = 3.0);

enum class EncodingDirection { kErrorLike, kScoreLike };

struct SweepSpec {
  std::vector<double> lambda_grid;  // sorted, contains exact 0
  int replicates = 5;
  nn::NetworkSpec network;   // grad_scale field is overwritten per point
  nn::TrainConfig train;     // seed field is overwritten per point
  probes::ProbeConfig probe;
  double auc_threshold = 0.8;
  FairnessMetric fairness_metric = FairnessMetric::kSeparation;
  EncodingDirection encoding_direction = EncodingDirection::kErrorLike;
  std::vector<double> bucket_edges;
  int min_included = 10;
  std::uint64_t base_seed = 0;
  int jobs = 1;

  void validate() const;  // throws ConfigError
};

struct SweepPoint {
  int lambda_index = 0;
  double lambda = 0.0;
  int replicate = 0;
  std::uint64_t seed = 0;
  double clinical_auc = 0.0;
  probes::EncodingResult encoding;
  fairness::FairnessReport fairness;
  bool excluded = false;
  std::string exclude_reason;
};

using PointCallback = std::function<void(const SweepPoint&, int done, int total)>;

/// Train one model per (lambda, replicate), threshold by max-F1 on
/// validation, and evaluate AUC, fairness, and the encoding probe on test.
/// Point seeds derive from (base_seed, lambda index, replicate); per-point
/// failures are recorded as excluded points. resume_points, when given, are
/// reused instead of recomputed. Throws SweepDegenerateError if every point
/// ends up excluded.
std::vector<SweepPoint> run_sweep(const data::Splits& splits, const SweepSpec& spec,
                                  const std::vector<SweepPoint>* resume_points = nullptr,
                                  const PointCallback& on_point = nullptr);

/// Spearman rank correlation (mid-ranks for ties). NaN if either argument
/// has zero rank variance.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Two-sided p-value for an observed Spearman rho at sample size n: exact
/// permutation enumeration for n <= 9, t-approximation otherwise.
double spearman_p(double rho, int n);

struct ShortVerdict {
  double rho = 0.0;
  double p_two_sided = 1.0;
  int n_included = 0;
  int n_excluded = 0;
  int expected_sign = -1;  // -1 error-like encoding, +1 score-like
  bool shortcut_detected = false;
  bool degenerate = false;  // constant encoding or fairness ranks
  double alpha = 0.05;
  FairnessMetric metric = FairnessMetric::kSeparation;
  probes::MetricKind encoding_kind = probes::MetricKind::kMae;
};

struct AnalysisSpec {
  FairnessMetric metric = FairnessMetric::kSeparation;
  EncodingDirection encoding_direction = EncodingDirection::kErrorLike;
  double alpha = 0.05;
  int min_included = 10;
};

/// The ShorT test: Spearman correlation between encoding and fairness over
/// included sweep points, significant in the expected direction => shortcut.
ShortVerdict short_test(const std::vector<SweepPoint>& points, const AnalysisSpec& spec);

struct CompareResult {
  double rho_a = 0.0, rho_b = 0.0;
  double difference = 0.0;  // |rho_a - rho_b|
  double p = 1.0;
  int n_perm = 0;
};

/// Permutation test for a difference in ShorT correlations between two
/// sweeps: pool included points, reshuffle into groups of the original
/// sizes, p = (1 + #{null >= observed}) / (1 + n_perm).
CompareResult compare_short(const std::vector<SweepPoint>& points_a,
                            const std::vector<SweepPoint>& points_b, const AnalysisSpec& spec,
                            int n_perm, std::uint64_t seed);

enum class Correction { kNone, kBonferroni };

/// Repeated end-to-end ShorT runs on freshly generated binary-attribute data
/// with class-conditional square-color probabilities drawn per run.
struct StudySpec {
  int n_runs = 50;
  double p_red_y1_lo = 0.9, p_red_y1_hi = 0.98;
  double p_red_y0_lo = 0.15, p_red_y0_hi = 0.23;
  data::BinaryAttrSpec data;  // p_red_given_* overwritten per run
  data::SplitFractions fractions;
  SweepSpec sweep;  // base_seed overwritten per run
  double alpha = 0.05;
  Correction correction = Correction::kBonferroni;
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct StudyRun {
  double p_red_y1 = 0.0, p_red_y0 = 0.0;
  ShortVerdict verdict;
  bool significant = false;
  bool failed = false;  // run aborted (degenerate sweep etc.)
  std::string note;
};

struct StudyResult {
  int n_runs = 0;
  int n_significant = 0;
  double alpha_effective = 0.05;
  std::vector<StudyRun> runs;

  double fraction_significant() const {
    return n_runs == 0 ? 0.0 : static_cast<double>(n_significant) / n_runs;
  }
};

StudyResult replicate_study(const StudySpec& spec);

double encoding_value(const SweepPoint& p);
double fairness_value(const SweepPoint& p, FairnessMetric m);

}  // namespace shortkit::analysis
