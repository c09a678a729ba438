#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shortkit/dataset.hpp"

namespace shortkit::nn {

enum class Activation { kRelu, kNone };

struct LayerSpec {
  int width = 0;
  Activation activation = Activation::kRelu;
};

enum class AttributeOutput { kContinuous, kBinary };

/// Feed-forward multitask architecture: a dense backbone feeding a clinical
/// head (sigmoid output) and an attribute head attached through a
/// gradient-scaling node with factor grad_scale. The node is the identity in
/// the forward pass; in the backward pass it multiplies the gradient flowing
/// from the attribute head into the backbone by grad_scale. Head-internal
/// gradients are never scaled.
struct NetworkSpec {
  int input_width = 0;
  std::vector<LayerSpec> backbone;
  std::vector<int> clinical_head;   // hidden widths then 1; empty = no clinical head
  std::vector<int> attribute_head;  // hidden widths then 1; empty = no attribute head
  AttributeOutput attribute_output = AttributeOutput::kContinuous;
  double grad_scale = 0.0;  // lambda

  bool has_clinical() const { return !clinical_head.empty(); }
  bool has_attribute() const { return !attribute_head.empty(); }
  int backbone_width() const {
    return backbone.empty() ? input_width : backbone.back().width;
  }
  void validate() const;  // throws ConfigError
};

struct LayerParams {
  int in = 0, out = 0;
  std::vector<double> w;  // out x in, row-major
  std::vector<double> b;  // out
};

struct LayerMoments {
  std::vector<double> mw, vw, mb, vb;
};

/// Parameters plus Adam accumulators for every dense layer of the network.
struct NetworkParams {
  std::vector<LayerParams> backbone;
  std::vector<LayerParams> clinical;
  std::vector<LayerParams> attribute;
  std::vector<LayerMoments> backbone_m;
  std::vector<LayerMoments> clinical_m;
  std::vector<LayerMoments> attribute_m;
  std::int64_t adam_steps = 0;

  bool backbone_equals(const NetworkParams& other) const;
  bool all_finite() const;
};

/// He-style uniform initialization. Each layer draws from a stream derived
/// from (seed, block role, layer index) so adding or removing a head leaves
/// the other blocks' initial values untouched.
NetworkParams init_params(const NetworkSpec& spec, std::uint64_t seed);

struct Batch {
  int n = 0, dim = 0;
  std::vector<double> x;  // row-major n x dim

  double* row(int i) { return x.data() + static_cast<std::size_t>(i) * dim; }
  const double* row(int i) const { return x.data() + static_cast<std::size_t>(i) * dim; }
};

struct ForwardResult {
  std::vector<double> clinical_scores;   // sigmoid(logit), in (0,1)
  std::vector<double> clinical_logits;
  std::vector<double> attribute_pred;    // linear output, or sigmoid for binary A
  std::vector<double> attribute_logits;
  std::vector<double> embeddings;        // n x backbone_width, row-major
};

/// Forward pass with cached activations for backward().
struct ForwardPass {
  ForwardResult out;
  std::vector<double> input;  // row-major n x input_width
  // post-activation output of each layer, row-major n x width
  std::vector<std::vector<double>> backbone_acts;
  std::vector<std::vector<double>> clinical_acts;
  std::vector<std::vector<double>> attribute_acts;
  int n = 0;
};

ForwardResult forward(const NetworkSpec& spec, const NetworkParams& params, const Batch& batch);
ForwardPass forward_cached(const NetworkSpec& spec, const NetworkParams& params, const Batch& batch);

struct LayerGrads {
  std::vector<double> dw, db;
};

struct Gradients {
  std::vector<LayerGrads> backbone;
  std::vector<LayerGrads> clinical;
  std::vector<LayerGrads> attribute;
  double loss = 0.0;            // clinical_loss + attr_weight * attribute_loss
  double clinical_loss = 0.0;   // mean cross-entropy
  double attribute_loss = 0.0;  // mean MSE or mean cross-entropy, unweighted
};

/// Batch-mean losses and gradients. labels may be empty when the network has
/// no clinical head, attributes likewise. Continuous attribute targets are
/// taken as passed (standardize upstream).
Gradients backward(const NetworkSpec& spec, const NetworkParams& params, const ForwardPass& pass,
                   const std::vector<int>& labels, const std::vector<double>& attributes,
                   double attr_loss_weight);

/// Losses only (no gradient); used by evaluation and the finite-difference
/// oracle. Returns {clinical_loss, attribute_loss_unweighted}.
std::pair<double, double> compute_losses(const NetworkSpec& spec, const NetworkParams& params,
                                         const Batch& batch, const std::vector<int>& labels,
                                         const std::vector<double>& attributes);

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One bias-corrected Adam update on a flat tensor. Decoupled weight decay is
/// applied as params *= (1 - lr*weight_decay) before the Adam delta.
/// step_count is the 1-based step the moments correspond to after the update.
void adam_step(std::vector<double>& params, const std::vector<double>& grads,
               std::vector<double>& m, std::vector<double>& v, std::int64_t step_count,
               double learning_rate, double weight_decay, const AdamHyper& hp = {});

enum class ModelSelection { kBestValidation, kLast };

struct TrainConfig {
  double learning_rate = 0.01;
  int batch_size = 32;
  int epochs = 10;
  double weight_decay = 0.0;
  double attribute_loss_weight = 0.75;  // w_A
  std::uint64_t seed = 0;
  ModelSelection model_selection = ModelSelection::kBestValidation;
};

struct EpochStats {
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_metric = 0.0;  // clinical AUC, or attribute MAE/AUROC when no clinical head
};

struct TrainResult {
  NetworkSpec spec;
  NetworkParams params;  // selected per model_selection
  std::vector<EpochStats> history;
  int best_epoch = -1;   // 0-based
  double attr_mean = 0.0, attr_sd = 1.0;  // training-set standardization of continuous A
};

/// Deterministic training: (spec, data, config) with the same seed produce
/// bit-identical parameters. Shuffling and initialization use independent
/// derived streams, so a grad_scale=0 multitask run shares the single-task
/// run's backbone trajectory exactly.
TrainResult train(const NetworkSpec& spec, const data::Dataset& train_set,
                  const data::Dataset& val_set, const TrainConfig& config);

Batch make_batch(const data::Dataset& ds);

/// Clinical scores for a whole dataset.
std::vector<double> clinical_scores(const NetworkSpec& spec, const NetworkParams& params,
                                    const data::Dataset& ds);

/// Attribute predictions, de-standardized for continuous A.
std::vector<double> attribute_predictions(const TrainResult& model, const data::Dataset& ds);

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;  // e.g. "backbone[1].w[23]"
  bool passed = false;
};

/// Central finite-difference check of backward(). The clinical and attribute
/// loss surfaces are probed separately and recombined with the block's
/// gradient scale, so nonzero grad_scale of either sign is checked exactly.
/// inject_bug_layer (such as "backbone[1]") perturbs one analytic gradient
/// entry, for negative-control tests.
GradCheckReport gradient_check(const NetworkSpec& spec, const NetworkParams& params,
                               const Batch& batch, const std::vector<int>& labels,
                               const std::vector<double>& attributes, double attr_loss_weight,
                               double epsilon = 1e-4, double tolerance = 1e-4,
                               const std::string& inject_bug_layer = "");

}  // namespace shortkit::nn
