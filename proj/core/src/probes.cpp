#include "shortkit/probes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "shortkit/errors.hpp"
#include "shortkit/fairness.hpp"
#include "shortkit/rng.hpp"

namespace shortkit::probes {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

const char* kKindNames[] = {"mae", "auroc"};

/// Replace each example's features with its backbone embedding.
data::Dataset embed_dataset(const nn::NetworkSpec& spec, const nn::NetworkParams& params,
                            const data::Dataset& ds) {
  const nn::Batch batch = nn::make_batch(ds);
  const nn::ForwardResult fwd = nn::forward(spec, params, batch);
  const int width = spec.backbone_width();

  data::Dataset out;
  out.attribute_kind = ds.attribute_kind;
  out.examples.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    data::Example e;
    e.id = ds.examples[i].id;
    e.label = ds.examples[i].label;
    e.attribute = ds.examples[i].attribute;
    const double* row = fwd.embeddings.data() + i * width;
    e.features.assign(row, row + width);
    out.examples.push_back(std::move(e));
  }
  return out;
}

/// Standardize features in place using train-set statistics.
void standardize_features(data::Dataset& train, data::Dataset& val, data::Dataset& test) {
  const int dim = train.feature_dim();
  std::vector<double> mean(dim, 0.0), sd(dim, 0.0);
  for (const auto& e : train.examples) {
    for (int d = 0; d < dim; ++d) mean[d] += e.features[d];
  }
  for (auto& m : mean) m /= static_cast<double>(train.size());
  for (const auto& e : train.examples) {
    for (int d = 0; d < dim; ++d) {
      const double c = e.features[d] - mean[d];
      sd[d] += c * c;
    }
  }
  for (auto& s : sd) {
    s = std::sqrt(s / static_cast<double>(train.size()));
    if (s == 0.0) s = 1.0;
  }
  for (auto* ds : {&train, &val, &test}) {
    for (auto& e : ds->examples) {
      for (int d = 0; d < dim; ++d) e.features[d] = (e.features[d] - mean[d]) / sd[d];
    }
  }
}

double mae_statistic(const std::vector<double>& pred, const std::vector<double>& truth,
                     const std::vector<int>& indices) {
  double acc = 0.0;
  for (int i : indices) acc += std::abs(pred[i] - truth[i]);
  return acc / static_cast<double>(indices.size());
}

double auroc_statistic(const std::vector<double>& scores, const std::vector<int>& labels,
                       const std::vector<int>& indices) {
  std::vector<double> s;
  std::vector<int> y;
  s.reserve(indices.size());
  y.reserve(indices.size());
  for (int i : indices) {
    s.push_back(scores[i]);
    y.push_back(labels[i]);
  }
  try {
    return fairness::auroc(s, y);
  } catch (const MetricUndefinedError&) {
    return kNan;  // single-class resample: redraw
  }
}

EncodingResult score_attribute_predictions(const std::vector<double>& pred,
                                           const data::Dataset& test, int n_bootstrap,
                                           std::uint64_t ci_seed) {
  const int n = static_cast<int>(test.size());
  EncodingResult res;
  res.n_test = n;
  const std::vector<double> truth = test.attributes();

  if (test.attribute_kind == data::AttributeKind::kBinary) {
    res.metric_kind = MetricKind::kAuroc;
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) y[i] = truth[i] >= 0.5 ? 1 : 0;
    res.value = fairness::auroc(pred, y);
    if (n_bootstrap > 0) {
      auto ci = fairness::bootstrap_ci(
          [&](const std::vector<int>& idx) { return auroc_statistic(pred, y, idx); }, n,
          n_bootstrap, 0.95, ci_seed);
      res.ci_lo = ci.lo;
      res.ci_hi = ci.hi;
      res.ci_redraws = ci.n_redrawn;
    } else {
      res.ci_lo = res.ci_hi = res.value;
    }
  } else {
    res.metric_kind = MetricKind::kMae;
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    res.value = mae_statistic(pred, truth, all);
    if (n_bootstrap > 0) {
      auto ci = fairness::bootstrap_ci(
          [&](const std::vector<int>& idx) { return mae_statistic(pred, truth, idx); }, n,
          n_bootstrap, 0.95, ci_seed);
      res.ci_lo = ci.lo;
      res.ci_hi = ci.hi;
      res.ci_redraws = ci.n_redrawn;
    } else {
      res.ci_lo = res.ci_hi = res.value;
    }
  }
  return res;
}

}  // namespace

const char* metric_kind_name(MetricKind k) { return kKindNames[static_cast<int>(k)]; }

EncodingResult attribute_transfer_probe(const nn::NetworkSpec& spec,
                                        const nn::NetworkParams& frozen_params,
                                        const data::Dataset& train, const data::Dataset& val,
                                        const data::Dataset& test, const ProbeConfig& config) {
  if (train.empty() || val.empty() || test.empty())
    throw InputError("attribute_transfer_probe: empty split");

  const nn::NetworkParams snapshot = frozen_params;  // bit-compare guard

  data::Dataset emb_train = embed_dataset(spec, frozen_params, train);
  data::Dataset emb_val = embed_dataset(spec, frozen_params, val);
  data::Dataset emb_test = embed_dataset(spec, frozen_params, test);
  standardize_features(emb_train, emb_val, emb_test);

  nn::NetworkSpec probe_spec;
  probe_spec.input_width = spec.backbone_width();
  for (int w : config.hidden_layers)
    probe_spec.backbone.push_back({w, nn::Activation::kRelu});
  probe_spec.attribute_head = {1};
  probe_spec.attribute_output = test.attribute_kind == data::AttributeKind::kBinary
                                    ? nn::AttributeOutput::kBinary
                                    : nn::AttributeOutput::kContinuous;
  probe_spec.grad_scale = 1.0;  // single task: the node only matters with two heads

  nn::TrainConfig tc;
  tc.learning_rate = config.learning_rate;
  tc.batch_size = config.batch_size;
  tc.epochs = config.epochs;
  tc.weight_decay = config.weight_decay;
  tc.attribute_loss_weight = 1.0;
  tc.seed = config.seed;
  tc.model_selection = nn::ModelSelection::kBestValidation;

  const nn::TrainResult probe = nn::train(probe_spec, emb_train, emb_val, tc);

  if (!frozen_params.backbone_equals(snapshot))
    throw InternalError("attribute_transfer_probe: frozen backbone parameters changed");

  const std::vector<double> pred = nn::attribute_predictions(probe, emb_test);
  return score_attribute_predictions(pred, emb_test, config.n_bootstrap,
                                     derive_seed(config.seed, 0xC1));
}

EncodingResult direct_attribute_model(const nn::NetworkSpec& backbone_spec,
                                      const data::Dataset& train, const data::Dataset& val,
                                      const data::Dataset& test, const nn::TrainConfig& config,
                                      int n_bootstrap, std::uint64_t ci_seed) {
  if (train.empty() || val.empty() || test.empty())
    throw InputError("direct_attribute_model: empty split");

  nn::NetworkSpec spec;
  spec.input_width = backbone_spec.input_width;
  spec.backbone = backbone_spec.backbone;
  spec.attribute_head = {1};
  spec.attribute_output = train.attribute_kind == data::AttributeKind::kBinary
                              ? nn::AttributeOutput::kBinary
                              : nn::AttributeOutput::kContinuous;
  spec.grad_scale = 1.0;

  const nn::TrainResult model = nn::train(spec, train, val, config);
  const std::vector<double> pred = nn::attribute_predictions(model, test);
  return score_attribute_predictions(pred, test, n_bootstrap, ci_seed);
}

EncodingResult constant_baseline(const data::Dataset& train, const data::Dataset& test,
                                 int n_bootstrap, std::uint64_t ci_seed) {
  if (train.empty() || test.empty()) throw InputError("constant_baseline: empty split");

  EncodingResult res;
  res.n_test = static_cast<int>(test.size());
  if (test.attribute_kind == data::AttributeKind::kBinary) {
    res.metric_kind = MetricKind::kAuroc;
    res.value = 0.5;  // no-information classifier
    res.ci_lo = res.ci_hi = 0.5;
    return res;
  }

  const std::vector<double> train_a = train.attributes();
  const double mean = std::accumulate(train_a.begin(), train_a.end(), 0.0) /
                      static_cast<double>(train_a.size());
  const std::vector<double> pred(test.size(), mean);
  return score_attribute_predictions(pred, test, n_bootstrap, ci_seed);
}

}  // namespace shortkit::probes
