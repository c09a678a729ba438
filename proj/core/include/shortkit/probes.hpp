#pragma once

#include <cstdint>
#include <vector>

#include "shortkit/dataset.hpp"
#include "shortkit/nn.hpp"

namespace shortkit::probes {

enum class MetricKind { kMae, kAuroc };

const char* metric_kind_name(MetricKind k);

struct EncodingResult {
  MetricKind metric_kind = MetricKind::kMae;
  double value = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;
  int n_test = 0;
  int ci_redraws = 0;
};

struct Bounds {
  EncodingResult leb;
  EncodingResult ueb;
};

struct ProbeConfig {
  double learning_rate = 0.05;
  int batch_size = 64;
  int epochs = 200;
  double weight_decay = 0.0;
  int n_bootstrap = 1000;  // 0 disables the CI
  std::uint64_t seed = 1;
  std::vector<int> hidden_layers;  // default empty: strictly linear probe
};

/// Train a linear head on frozen backbone embeddings and score how well the
/// attribute can be recovered (MAE for continuous A, AUROC for binary A, on
/// the test split). Throws InternalError if the backbone changed.
EncodingResult attribute_transfer_probe(const nn::NetworkSpec& spec,
                                        const nn::NetworkParams& frozen_params,
                                        const data::Dataset& train, const data::Dataset& val,
                                        const data::Dataset& test, const ProbeConfig& config);

/// Train the full architecture (backbone + linear attribute head) directly on
/// the attribute: the empirical lower error bound (upper bound for AUROC).
EncodingResult direct_attribute_model(const nn::NetworkSpec& backbone_spec,
                                      const data::Dataset& train, const data::Dataset& val,
                                      const data::Dataset& test, const nn::TrainConfig& config,
                                      int n_bootstrap, std::uint64_t ci_seed);

/// Predict the training-set mean attribute for every test example: the
/// empirical upper error bound. For binary A this is AUROC 0.5 by definition.
EncodingResult constant_baseline(const data::Dataset& train, const data::Dataset& test,
                                 int n_bootstrap, std::uint64_t ci_seed);

}  // namespace shortkit::probes
