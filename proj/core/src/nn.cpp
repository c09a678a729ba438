#include "shortkit/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "shortkit/errors.hpp"
#include "shortkit/fairness.hpp"
#include "shortkit/rng.hpp"

namespace shortkit::nn {

namespace {

// seed-stream tags
constexpr std::uint64_t kTagInit = 0x696e6974;      // per-layer init
constexpr std::uint64_t kTagShuffle = 0x73687566;   // epoch shuffling
constexpr std::uint64_t kRoleBackbone = 1;
constexpr std::uint64_t kRoleClinical = 2;
constexpr std::uint64_t kRoleAttribute = 3;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// mean binary cross-entropy from logits: softplus(z) - y*z
double bce_from_logits(const std::vector<double>& logits, const std::vector<int>& y) {
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double z = logits[i];
    const double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    total += softplus - y[i] * z;
  }
  return total / static_cast<double>(logits.size());
}

double bce_from_logits_real(const std::vector<double>& logits, const std::vector<double>& y) {
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double z = logits[i];
    const double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    total += softplus - y[i] * z;
  }
  return total / static_cast<double>(logits.size());
}

double mse(const std::vector<double>& pred, const std::vector<double>& target) {
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    total += d * d;
  }
  return total / static_cast<double>(pred.size());
}

// Z = A * W^T + b, then activation. A is n x in, W is out x in.
void dense_forward(const LayerParams& layer, Activation act, const std::vector<double>& a, int n,
                   std::vector<double>& out) {
  out.assign(static_cast<std::size_t>(n) * layer.out, 0.0);
  for (int r = 0; r < n; ++r) {
    const double* arow = a.data() + static_cast<std::size_t>(r) * layer.in;
    double* orow = out.data() + static_cast<std::size_t>(r) * layer.out;
    for (int o = 0; o < layer.out; ++o) {
      const double* wrow = layer.w.data() + static_cast<std::size_t>(o) * layer.in;
      double z = layer.b[o];
      for (int i = 0; i < layer.in; ++i) z += arow[i] * wrow[i];
      orow[o] = act == Activation::kRelu ? (z > 0.0 ? z : 0.0) : z;
    }
  }
}

Activation head_activation(const std::vector<int>& head, std::size_t layer_idx) {
  return layer_idx + 1 == head.size() ? Activation::kNone : Activation::kRelu;
}

struct BlockLayout {
  std::vector<int> in, out;
  std::vector<Activation> act;
};

BlockLayout backbone_layout(const NetworkSpec& spec) {
  BlockLayout l;
  int in = spec.input_width;
  for (const auto& ls : spec.backbone) {
    l.in.push_back(in);
    l.out.push_back(ls.width);
    l.act.push_back(ls.activation);
    in = ls.width;
  }
  return l;
}

BlockLayout head_layout(const NetworkSpec& spec, const std::vector<int>& head) {
  BlockLayout l;
  int in = spec.backbone_width();
  for (std::size_t i = 0; i < head.size(); ++i) {
    l.in.push_back(in);
    l.out.push_back(head[i]);
    l.act.push_back(head_activation(head, i));
    in = head[i];
  }
  return l;
}

std::vector<LayerParams> init_block(const BlockLayout& layout, std::uint64_t seed,
                                    std::uint64_t role) {
  std::vector<LayerParams> layers;
  for (std::size_t i = 0; i < layout.in.size(); ++i) {
    LayerParams p;
    p.in = layout.in[i];
    p.out = layout.out[i];
    p.w.resize(static_cast<std::size_t>(p.in) * p.out);
    p.b.assign(p.out, 0.0);
    Rng rng(derive_seed(seed, kTagInit, role, i));
    const double limit = std::sqrt(6.0 / p.in);
    for (auto& w : p.w) w = rng.uniform(-limit, limit);
    layers.push_back(std::move(p));
  }
  return layers;
}

std::vector<LayerMoments> zero_moments(const std::vector<LayerParams>& layers) {
  std::vector<LayerMoments> m;
  for (const auto& l : layers) {
    LayerMoments lm;
    lm.mw.assign(l.w.size(), 0.0);
    lm.vw.assign(l.w.size(), 0.0);
    lm.mb.assign(l.b.size(), 0.0);
    lm.vb.assign(l.b.size(), 0.0);
    m.push_back(std::move(lm));
  }
  return m;
}

// Runs a block forward; acts[i] holds the post-activation output of layer i.
void block_forward(const std::vector<LayerParams>& layers, const BlockLayout& layout,
                   const std::vector<double>& input, int n,
                   std::vector<std::vector<double>>& acts) {
  acts.resize(layers.size());
  const std::vector<double>* cur = &input;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    dense_forward(layers[i], layout.act[i], *cur, n, acts[i]);
    cur = &acts[i];
  }
}

// Backpropagates d_out (gradient wrt the block output) through the block.
// Returns the gradient wrt the block input and fills per-layer grads.
std::vector<double> block_backward(const std::vector<LayerParams>& layers,
                                   const BlockLayout& layout, const std::vector<double>& input,
                                   const std::vector<std::vector<double>>& acts, int n,
                                   std::vector<double> d_out, std::vector<LayerGrads>& grads) {
  grads.resize(layers.size());
  for (std::size_t li = layers.size(); li-- > 0;) {
    const LayerParams& layer = layers[li];
    const std::vector<double>& a_in = li == 0 ? input : acts[li - 1];
    const std::vector<double>& a_out = acts[li];

    // through the activation: relu derivative from the post-activation sign
    if (layout.act[li] == Activation::kRelu) {
      for (std::size_t k = 0; k < d_out.size(); ++k) {
        if (a_out[k] <= 0.0) d_out[k] = 0.0;
      }
    }

    LayerGrads& g = grads[li];
    g.dw.assign(layer.w.size(), 0.0);
    g.db.assign(layer.b.size(), 0.0);
    std::vector<double> d_in(static_cast<std::size_t>(n) * layer.in, 0.0);
    for (int r = 0; r < n; ++r) {
      const double* dz = d_out.data() + static_cast<std::size_t>(r) * layer.out;
      const double* arow = a_in.data() + static_cast<std::size_t>(r) * layer.in;
      double* drow = d_in.data() + static_cast<std::size_t>(r) * layer.in;
      for (int o = 0; o < layer.out; ++o) {
        const double d = dz[o];
        if (d == 0.0) continue;
        g.db[o] += d;
        double* dwrow = g.dw.data() + static_cast<std::size_t>(o) * layer.in;
        const double* wrow = layer.w.data() + static_cast<std::size_t>(o) * layer.in;
        for (int i = 0; i < layer.in; ++i) {
          dwrow[i] += d * arow[i];
          drow[i] += d * wrow[i];
        }
      }
    }
    d_out = std::move(d_in);
  }
  return d_out;
}

ForwardPass forward_impl(const NetworkSpec& spec, const NetworkParams& params,
                         const Batch& batch) {
  ForwardPass pass;
  pass.n = batch.n;
  pass.input = batch.x;
  const auto bl = backbone_layout(spec);
  block_forward(params.backbone, bl, pass.input, batch.n, pass.backbone_acts);
  const std::vector<double>& embeddings =
      spec.backbone.empty() ? pass.input : pass.backbone_acts.back();
  pass.out.embeddings = embeddings;

  if (spec.has_clinical()) {
    const auto cl = head_layout(spec, spec.clinical_head);
    block_forward(params.clinical, cl, embeddings, batch.n, pass.clinical_acts);
    pass.out.clinical_logits = pass.clinical_acts.back();
    pass.out.clinical_scores.resize(batch.n);
    for (int i = 0; i < batch.n; ++i)
      pass.out.clinical_scores[i] = sigmoid(pass.out.clinical_logits[i]);
  }
  if (spec.has_attribute()) {
    // the gradient-scaling node is the identity here
    const auto al = head_layout(spec, spec.attribute_head);
    block_forward(params.attribute, al, embeddings, batch.n, pass.attribute_acts);
    pass.out.attribute_logits = pass.attribute_acts.back();
    pass.out.attribute_pred.resize(batch.n);
    for (int i = 0; i < batch.n; ++i) {
      pass.out.attribute_pred[i] = spec.attribute_output == AttributeOutput::kBinary
                                       ? sigmoid(pass.out.attribute_logits[i])
                                       : pass.out.attribute_logits[i];
    }
  }
  return pass;
}

void check_batch(const NetworkSpec& spec, const Batch& batch) {
  if (batch.dim != spec.input_width)
    throw ConfigError("forward: batch width " + std::to_string(batch.dim) +
                      " does not match network input width " + std::to_string(spec.input_width));
  for (double v : batch.x) {
    if (!std::isfinite(v)) throw InputError("forward: non-finite feature value");
  }
}

double population_sd(const std::vector<double>& v, double mean) {
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

}  // namespace

void NetworkSpec::validate() const {
  if (input_width <= 0) throw ConfigError("NetworkSpec: input_width must be positive");
  for (const auto& l : backbone) {
    if (l.width <= 0) throw ConfigError("NetworkSpec: backbone layer width must be positive");
  }
  if (!has_clinical() && !has_attribute())
    throw ConfigError("NetworkSpec: at least one head is required");
  if (has_clinical() && clinical_head.back() != 1)
    throw ConfigError("NetworkSpec: clinical head must end in 1 unit");
  if (has_attribute() && attribute_head.back() != 1)
    throw ConfigError("NetworkSpec: attribute head must end in 1 unit");
  for (int w : clinical_head) {
    if (w <= 0) throw ConfigError("NetworkSpec: clinical head width must be positive");
  }
  for (int w : attribute_head) {
    if (w <= 0) throw ConfigError("NetworkSpec: attribute head width must be positive");
  }
  if (!std::isfinite(grad_scale)) throw ConfigError("NetworkSpec: grad_scale must be finite");
}

bool NetworkParams::backbone_equals(const NetworkParams& other) const {
  if (backbone.size() != other.backbone.size()) return false;
  for (std::size_t i = 0; i < backbone.size(); ++i) {
    if (backbone[i].w != other.backbone[i].w || backbone[i].b != other.backbone[i].b)
      return false;
  }
  return true;
}

bool NetworkParams::all_finite() const {
  auto ok = [](const std::vector<LayerParams>& layers) {
    for (const auto& l : layers) {
      for (double v : l.w)
        if (!std::isfinite(v)) return false;
      for (double v : l.b)
        if (!std::isfinite(v)) return false;
    }
    return true;
  };
  return ok(backbone) && ok(clinical) && ok(attribute);
}

NetworkParams init_params(const NetworkSpec& spec, std::uint64_t seed) {
  spec.validate();
  NetworkParams p;
  p.backbone = init_block(backbone_layout(spec), seed, kRoleBackbone);
  if (spec.has_clinical())
    p.clinical = init_block(head_layout(spec, spec.clinical_head), seed, kRoleClinical);
  if (spec.has_attribute())
    p.attribute = init_block(head_layout(spec, spec.attribute_head), seed, kRoleAttribute);
  p.backbone_m = zero_moments(p.backbone);
  p.clinical_m = zero_moments(p.clinical);
  p.attribute_m = zero_moments(p.attribute);
  return p;
}

ForwardResult forward(const NetworkSpec& spec, const NetworkParams& params, const Batch& batch) {
  check_batch(spec, batch);
  return forward_impl(spec, params, batch).out;
}

ForwardPass forward_cached(const NetworkSpec& spec, const NetworkParams& params,
                           const Batch& batch) {
  check_batch(spec, batch);
  return forward_impl(spec, params, batch);
}

Gradients backward(const NetworkSpec& spec, const NetworkParams& params, const ForwardPass& pass,
                   const std::vector<int>& labels, const std::vector<double>& attributes,
                   double attr_loss_weight) {
  const int n = pass.n;
  Gradients g;

  std::vector<double> d_embed(static_cast<std::size_t>(n) * spec.backbone_width(), 0.0);

  if (spec.has_clinical()) {
    if (static_cast<int>(labels.size()) != n)
      throw InputError("backward: labels size mismatch");
    g.clinical_loss = bce_from_logits(pass.out.clinical_logits, labels);
    std::vector<double> d_logit(n);
    for (int i = 0; i < n; ++i)
      d_logit[i] = (pass.out.clinical_scores[i] - labels[i]) / static_cast<double>(n);
    const auto cl = head_layout(spec, spec.clinical_head);
    std::vector<double> d_from_clin = block_backward(
        params.clinical, cl, pass.out.embeddings, pass.clinical_acts, n, std::move(d_logit),
        g.clinical);
    for (std::size_t k = 0; k < d_embed.size(); ++k) d_embed[k] += d_from_clin[k];
  }

  if (spec.has_attribute()) {
    if (static_cast<int>(attributes.size()) != n)
      throw InputError("backward: attributes size mismatch");
    std::vector<double> d_out(n);
    if (spec.attribute_output == AttributeOutput::kBinary) {
      g.attribute_loss = bce_from_logits_real(pass.out.attribute_logits, attributes);
      for (int i = 0; i < n; ++i)
        d_out[i] = attr_loss_weight * (pass.out.attribute_pred[i] - attributes[i]) /
                   static_cast<double>(n);
    } else {
      g.attribute_loss = mse(pass.out.attribute_pred, attributes);
      for (int i = 0; i < n; ++i)
        d_out[i] = attr_loss_weight * 2.0 * (pass.out.attribute_pred[i] - attributes[i]) /
                   static_cast<double>(n);
    }
    const auto al = head_layout(spec, spec.attribute_head);
    std::vector<double> d_from_attr = block_backward(
        params.attribute, al, pass.out.embeddings, pass.attribute_acts, n, std::move(d_out),
        g.attribute);
    // the gradient-scaling node: only the flow into the backbone is scaled
    if (spec.grad_scale != 0.0) {
      for (std::size_t k = 0; k < d_embed.size(); ++k)
        d_embed[k] += spec.grad_scale * d_from_attr[k];
    }
  }

  if (!spec.backbone.empty()) {
    block_backward(params.backbone, backbone_layout(spec), pass.input, pass.backbone_acts, n,
                   std::move(d_embed), g.backbone);
  }
  g.loss = g.clinical_loss + attr_loss_weight * g.attribute_loss;
  return g;
}

std::pair<double, double> compute_losses(const NetworkSpec& spec, const NetworkParams& params,
                                         const Batch& batch, const std::vector<int>& labels,
                                         const std::vector<double>& attributes) {
  const ForwardPass pass = forward_impl(spec, params, batch);
  double clin = 0.0, attr = 0.0;
  if (spec.has_clinical()) clin = bce_from_logits(pass.out.clinical_logits, labels);
  if (spec.has_attribute()) {
    attr = spec.attribute_output == AttributeOutput::kBinary
               ? bce_from_logits_real(pass.out.attribute_logits, attributes)
               : mse(pass.out.attribute_pred, attributes);
  }
  return {clin, attr};
}

void adam_step(std::vector<double>& params, const std::vector<double>& grads,
               std::vector<double>& m, std::vector<double>& v, std::int64_t step_count,
               double learning_rate, double weight_decay, const AdamHyper& hp) {
  if (params.size() != grads.size() || m.size() != params.size() || v.size() != params.size())
    throw ConfigError("adam_step: tensor size mismatch");
  if (step_count < 1) throw ConfigError("adam_step: step_count must be >= 1");
  for (double gv : grads) {
    if (!std::isfinite(gv)) throw DivergenceError("adam_step: non-finite gradient", step_count);
  }
  const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(step_count));
  const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(step_count));
  const double decay = 1.0 - learning_rate * weight_decay;
  for (std::size_t i = 0; i < params.size(); ++i) {
    m[i] = hp.beta1 * m[i] + (1.0 - hp.beta1) * grads[i];
    v[i] = hp.beta2 * v[i] + (1.0 - hp.beta2) * grads[i] * grads[i];
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    params[i] = params[i] * decay - learning_rate * mhat / (std::sqrt(vhat) + hp.epsilon);
  }
}

namespace {

void apply_adam_block(std::vector<LayerParams>& layers, std::vector<LayerMoments>& moments,
                      const std::vector<LayerGrads>& grads, std::int64_t step, double lr,
                      double weight_decay) {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    adam_step(layers[i].w, grads[i].dw, moments[i].mw, moments[i].vw, step, lr, weight_decay);
    // biases are exempt from decay
    adam_step(layers[i].b, grads[i].db, moments[i].mb, moments[i].vb, step, lr, 0.0);
  }
}

}  // namespace

Batch make_batch(const data::Dataset& ds) {
  Batch b;
  b.n = static_cast<int>(ds.size());
  b.dim = ds.feature_dim();
  b.x.reserve(static_cast<std::size_t>(b.n) * b.dim);
  for (const auto& e : ds.examples) {
    if (static_cast<int>(e.features.size()) != b.dim)
      throw InputError("make_batch: ragged feature vectors");
    b.x.insert(b.x.end(), e.features.begin(), e.features.end());
  }
  return b;
}

TrainResult train(const NetworkSpec& spec, const data::Dataset& train_set,
                  const data::Dataset& val_set, const TrainConfig& config) {
  spec.validate();
  if (train_set.empty() || val_set.empty()) throw InputError("train: empty dataset");
  if (config.learning_rate <= 0) throw ConfigError("train: learning_rate must be positive");
  if (config.batch_size <= 0) throw ConfigError("train: batch_size must be positive");
  if (config.epochs <= 0) throw ConfigError("train: epochs must be positive");
  if (config.weight_decay < 0) throw ConfigError("train: weight_decay must be nonnegative");
  if (config.attribute_loss_weight < 0)
    throw ConfigError("train: attribute_loss_weight must be nonnegative");

  const Batch train_x = make_batch(train_set);
  const Batch val_x = make_batch(val_set);
  check_batch(spec, train_x);
  check_batch(spec, val_x);

  TrainResult result;
  result.spec = spec;

  const bool continuous_attr =
      spec.has_attribute() && spec.attribute_output == AttributeOutput::kContinuous;
  std::vector<double> train_attr = train_set.attributes();
  std::vector<double> val_attr = val_set.attributes();
  if (continuous_attr) {
    const double mean = std::accumulate(train_attr.begin(), train_attr.end(), 0.0) /
                        static_cast<double>(train_attr.size());
    double sd = population_sd(train_attr, mean);
    if (sd == 0.0) sd = 1.0;
    result.attr_mean = mean;
    result.attr_sd = sd;
    for (auto& a : train_attr) a = (a - mean) / sd;
    for (auto& a : val_attr) a = (a - mean) / sd;
  } else {
    result.attr_mean = 0.0;
    result.attr_sd = 1.0;
  }
  const std::vector<int> train_y = train_set.labels();
  const std::vector<int> val_y = val_set.labels();

  NetworkParams params = init_params(spec, config.seed);
  Rng shuffle_rng(derive_seed(config.seed, kTagShuffle));

  const int n = train_x.n;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  const bool select_maximize = spec.has_clinical() ||
                               spec.attribute_output == AttributeOutput::kBinary;
  double best_metric = select_maximize ? -std::numeric_limits<double>::infinity()
                                       : std::numeric_limits<double>::infinity();
  NetworkParams best_params;
  std::int64_t global_step = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    for (int start = 0; start < n; start += config.batch_size) {
      const int bs = std::min(config.batch_size, n - start);
      Batch batch;
      batch.n = bs;
      batch.dim = train_x.dim;
      batch.x.resize(static_cast<std::size_t>(bs) * batch.dim);
      std::vector<int> by(bs);
      std::vector<double> ba(bs);
      for (int r = 0; r < bs; ++r) {
        const int src = order[start + r];
        std::copy_n(train_x.row(src), batch.dim, batch.row(r));
        by[r] = train_y[src];
        ba[r] = train_attr[src];
      }
      const ForwardPass pass = forward_impl(spec, params, batch);
      const Gradients grads =
          backward(spec, params, pass, spec.has_clinical() ? by : std::vector<int>(),
                   spec.has_attribute() ? ba : std::vector<double>(),
                   config.attribute_loss_weight);
      ++global_step;
      if (!std::isfinite(grads.loss))
        throw DivergenceError("train: non-finite loss", global_step);
      apply_adam_block(params.backbone, params.backbone_m, grads.backbone, global_step,
                       config.learning_rate, config.weight_decay);
      apply_adam_block(params.clinical, params.clinical_m, grads.clinical, global_step,
                       config.learning_rate, config.weight_decay);
      apply_adam_block(params.attribute, params.attribute_m, grads.attribute, global_step,
                       config.learning_rate, config.weight_decay);
      epoch_loss += grads.loss * bs;
    }

    EpochStats stats;
    stats.train_loss = epoch_loss / n;

    const ForwardPass val_pass = forward_impl(spec, params, val_x);
    double val_clin = 0.0, val_attr_loss = 0.0;
    if (spec.has_clinical()) val_clin = bce_from_logits(val_pass.out.clinical_logits, val_y);
    if (spec.has_attribute()) {
      val_attr_loss = spec.attribute_output == AttributeOutput::kBinary
                          ? bce_from_logits_real(val_pass.out.attribute_logits, val_attr)
                          : mse(val_pass.out.attribute_pred, val_attr);
    }
    stats.val_loss = val_clin + config.attribute_loss_weight * val_attr_loss;

    if (spec.has_clinical()) {
      stats.val_metric = fairness::auroc(val_pass.out.clinical_scores, val_y);
    } else if (spec.attribute_output == AttributeOutput::kBinary) {
      std::vector<int> attr_labels(val_y.size());
      for (std::size_t i = 0; i < val_attr.size(); ++i)
        attr_labels[i] = val_attr[i] >= 0.5 ? 1 : 0;
      stats.val_metric = fairness::auroc(val_pass.out.attribute_pred, attr_labels);
    } else {
      double mae = 0.0;
      for (std::size_t i = 0; i < val_attr.size(); ++i)
        mae += std::abs(val_pass.out.attribute_pred[i] - val_attr[i]) * result.attr_sd;
      stats.val_metric = mae / static_cast<double>(val_attr.size());
    }
    result.history.push_back(stats);

    const bool improved = select_maximize ? stats.val_metric > best_metric
                                          : stats.val_metric < best_metric;
    if (improved) {
      best_metric = stats.val_metric;
      best_params = params;
      result.best_epoch = epoch;
    }
  }

  if (config.model_selection == ModelSelection::kBestValidation && result.best_epoch >= 0) {
    result.params = std::move(best_params);
  } else {
    result.params = std::move(params);
    result.best_epoch = config.epochs - 1;
  }
  return result;
}

std::vector<double> clinical_scores(const NetworkSpec& spec, const NetworkParams& params,
                                    const data::Dataset& ds) {
  const Batch b = make_batch(ds);
  return forward(spec, params, b).clinical_scores;
}

std::vector<double> attribute_predictions(const TrainResult& model, const data::Dataset& ds) {
  const Batch b = make_batch(ds);
  ForwardResult r = forward(model.spec, model.params, b);
  if (model.spec.attribute_output == AttributeOutput::kContinuous) {
    for (auto& p : r.attribute_pred) p = p * model.attr_sd + model.attr_mean;
  }
  return r.attribute_pred;
}

namespace {

struct ParamRef {
  const char* block;
  std::size_t layer;
  bool is_weight;
  std::size_t index;
};

double& param_at(NetworkParams& p, const ParamRef& ref) {
  auto& layers = ref.block == std::string("backbone")
                     ? p.backbone
                     : (ref.block == std::string("clinical") ? p.clinical : p.attribute);
  return ref.is_weight ? layers[ref.layer].w[ref.index] : layers[ref.layer].b[ref.index];
}

}  // namespace

GradCheckReport gradient_check(const NetworkSpec& spec, const NetworkParams& params,
                               const Batch& batch, const std::vector<int>& labels,
                               const std::vector<double>& attributes, double attr_loss_weight,
                               double epsilon, double tolerance,
                               const std::string& inject_bug_layer) {
  const ForwardPass pass = forward_cached(spec, params, batch);
  Gradients analytic = backward(spec, params, pass, labels, attributes, attr_loss_weight);

  if (!inject_bug_layer.empty()) {
    auto bump = [&](std::vector<LayerGrads>& g, const std::string& name) {
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (inject_bug_layer == name + "[" + std::to_string(i) + "]" && !g[i].dw.empty())
          g[i].dw[0] += 1e-2;
      }
    };
    bump(analytic.backbone, "backbone");
    bump(analytic.clinical, "clinical");
    bump(analytic.attribute, "attribute");
  }

  GradCheckReport report;
  NetworkParams probe = params;

  auto fd_pair = [&](const ParamRef& ref) -> std::pair<double, double> {
    double& p = param_at(probe, ref);
    const double saved = p;
    p = saved + epsilon;
    const auto [clin_hi, attr_hi] = compute_losses(spec, probe, batch, labels, attributes);
    p = saved - epsilon;
    const auto [clin_lo, attr_lo] = compute_losses(spec, probe, batch, labels, attributes);
    p = saved;
    return {(clin_hi - clin_lo) / (2.0 * epsilon), (attr_hi - attr_lo) / (2.0 * epsilon)};
  };

  auto check_block = [&](const char* block_name, const std::vector<LayerParams>& layers,
                         const std::vector<LayerGrads>& grads, double attr_scale) {
    for (std::size_t li = 0; li < layers.size(); ++li) {
      for (int part = 0; part < 2; ++part) {
        const bool is_weight = part == 0;
        const std::size_t count = is_weight ? layers[li].w.size() : layers[li].b.size();
        for (std::size_t k = 0; k < count; ++k) {
          const auto [fd_clin, fd_attr] = fd_pair({block_name, li, is_weight, k});
          const double expected = fd_clin + attr_scale * fd_attr;
          const double got = is_weight ? grads[li].dw[k] : grads[li].db[k];
          const double rel = std::abs(got - expected) /
                             std::max({std::abs(got), std::abs(expected), 1e-3});
          if (rel > report.max_rel_error) {
            report.max_rel_error = rel;
            report.worst_param = std::string(block_name) + "[" + std::to_string(li) + "]." +
                                 (is_weight ? "w[" : "b[") + std::to_string(k) + "]";
          }
        }
      }
    }
  };

  check_block("backbone", params.backbone, analytic.backbone,
              attr_loss_weight * spec.grad_scale);
  check_block("clinical", params.clinical, analytic.clinical, 0.0);
  check_block("attribute", params.attribute, analytic.attribute, attr_loss_weight);

  report.passed = report.max_rel_error < tolerance;
  return report;
}

}  // namespace shortkit::nn
