#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "shortkit/dataset.hpp"

namespace shortkit::data {

/// Synthetic two-channel images: a label-dependent global pattern, a colored
/// square whose channel is the binary attribute, and Gaussian noise on both.
struct BinaryAttrSpec {
  int n = 2000;
  int image_side = 12;
  int square_side = 2;
  double p_red_given_y1 = 0.5;  // P(A=red | Y=1)
  double p_red_given_y0 = 0.5;  // P(A=red | Y=0)
  double noise_sigma = 1.0;
  double signal_strength = 2.0;   // separation of the Y pattern along a unit direction
  double square_strength = 3.0;   // intensity of the colored square
  double label_prevalence = 0.5;  // P(Y=1)
};

/// Tabular data with a continuous attribute: one feature block carries the
/// (noisy) attribute, the rest carries the label signal. Labels follow
/// P(Y=1|a) = sigmoid(beta0 + beta1*a).
struct ContinuousAttrSpec {
  int n = 4000;
  double a_min = 20.0;
  double a_max = 80.0;
  double beta0 = 0.0;
  double beta1 = 0.0;
  double coupling = 1.5;  // attribute-to-feature strength; 0 removes A from features
  double signal_strength = 2.0;
  double noise_sigma = 1.0;
  int n_features = 32;
  int attr_block = 8;  // leading features carrying the attribute
};

/// Logistic retain-probability p = m / (1 + e^{-k(a-a0)}), applied to positive
/// examples; negatives are retained with 1-p (both clamped to [0,1]).
struct SubsampleSpec {
  double k = 0.0;
  double a0 = 50.0;
  double m = 1.0;
};

struct SplitFractions {
  double train = 0.85;
  double validation = 0.05;
  double test = 0.10;
};

struct Splits {
  Dataset train;
  Dataset validation;
  Dataset test;
};

struct ClassSummary {
  std::int64_t count = 0;
  double mean_attribute = 0.0;
  double sd_attribute = 0.0;
};

struct DatasetStats {
  std::int64_t n = 0;
  double prevalence = 0.0;
  ClassSummary positives;
  ClassSummary negatives;
  double attribute_gap = 0.0;  // mean A(Y=1) - mean A(Y=0)
};

Dataset generate_binary_attr(const BinaryAttrSpec& spec, std::uint64_t seed);
Dataset generate_continuous_attr(const ContinuousAttrSpec& spec, std::uint64_t seed);

Dataset subsample(const Dataset& dataset, const SubsampleSpec& spec, std::uint64_t seed);

/// Unclamped retain probability for a positive example of attribute a.
double retain_probability(const SubsampleSpec& spec, double a);

/// Expected post-subsample attribute gap, computed from retain weights
/// without drawing samples.
double expected_subsample_gap(const Dataset& dataset, const SubsampleSpec& spec);

/// Search k (at fixed a0, m) so the expected between-class attribute-mean gap
/// matches target_gap. The paper obtains these parameters by trial and error;
/// this automates the search.
SubsampleSpec calibrate_subsample(const Dataset& dataset, double target_gap, double a0, double m);

/// Swap the colored square to the other channel; everything else is
/// reconstructed bit-exactly. Requires generator metadata.
Example counterfactual_flip(const Example& example);

Splits split(const Dataset& dataset, const SplitFractions& fractions, std::uint64_t seed);

DatasetStats dataset_stats(const Dataset& dataset);

}  // namespace shortkit::data
