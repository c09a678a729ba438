#include "shortkit/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "shortkit/errors.hpp"
#include "shortkit/rng.hpp"

namespace shortkit::data {

namespace {

constexpr std::uint64_t kTagPattern = 0x70617474;  // fixed Y-signal pattern
constexpr std::uint64_t kTagSplit = 0x73706c74;
constexpr std::uint64_t kTagSubsample = 0x73756273;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// Fixed unit-norm +/-1 pattern for the label signal. Part of the generator
/// definition, not of the per-dataset randomness.
std::vector<double> signal_pattern(int dim, std::uint64_t variant) {
  Rng rng(derive_seed(kTagPattern, variant));
  std::vector<double> p(dim);
  const double unit = 1.0 / std::sqrt(static_cast<double>(dim));
  for (auto& v : p) v = rng.bernoulli(0.5) ? unit : -unit;
  return p;
}

void rebuild_square_blocks(Example& e, int image_side, int square_side) {
  const SquareOverlay& sq = *e.square;
  const int pixels = image_side * image_side;
  int k = 0;
  for (int r = sq.row; r < sq.row + square_side; ++r) {
    for (int c = sq.col; c < sq.col + square_side; ++c, ++k) {
      const int idx = r * image_side + c;
      const double with0 = sq.base0[k] + (sq.channel == 0 ? sq.overlay[k] : 0.0);
      const double with1 = sq.base1[k] + (sq.channel == 1 ? sq.overlay[k] : 0.0);
      e.features[idx] = with0;
      e.features[pixels + idx] = with1;
    }
  }
}

void validate_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0))
    throw InputError(std::string("generate_binary_attr: ") + name + " must lie in [0,1]");
}

}  // namespace

Dataset generate_binary_attr(const BinaryAttrSpec& spec, std::uint64_t seed) {
  if (spec.n <= 0) throw InputError("generate_binary_attr: n must be positive");
  if (spec.image_side <= 0 || spec.square_side <= 0 || spec.square_side > spec.image_side)
    throw InputError("generate_binary_attr: invalid image geometry");
  validate_probability(spec.p_red_given_y1, "p_red_given_y1");
  validate_probability(spec.p_red_given_y0, "p_red_given_y0");
  validate_probability(spec.label_prevalence, "label_prevalence");
  if (spec.noise_sigma < 0) throw InputError("generate_binary_attr: noise_sigma must be >= 0");

  const int pixels = spec.image_side * spec.image_side;
  const int dim = 2 * pixels;
  const std::vector<double> pattern = signal_pattern(dim, /*variant=*/1);

  Dataset ds;
  ds.attribute_kind = AttributeKind::kBinary;
  ds.image_side = spec.image_side;
  ds.square_side = spec.square_side;
  ds.examples.reserve(spec.n);

  Rng rng(seed);
  const int max_pos = spec.image_side - spec.square_side;
  const int sq_pixels = spec.square_side * spec.square_side;

  for (int i = 0; i < spec.n; ++i) {
    Example e;
    e.id = i;
    e.label = rng.bernoulli(spec.label_prevalence) ? 1 : 0;
    const double p_red = e.label == 1 ? spec.p_red_given_y1 : spec.p_red_given_y0;
    const bool red = rng.bernoulli(p_red);
    e.attribute = red ? 1.0 : 0.0;

    const double shift = (e.label == 1 ? 0.5 : -0.5) * spec.signal_strength;
    e.features.resize(dim);
    for (int d = 0; d < dim; ++d)
      e.features[d] = shift * pattern[d] + rng.normal(0.0, spec.noise_sigma);

    SquareOverlay sq;
    sq.row = static_cast<int>(rng.uniform_index(max_pos + 1));
    sq.col = static_cast<int>(rng.uniform_index(max_pos + 1));
    sq.channel = red ? 0 : 1;
    sq.base0.resize(sq_pixels);
    sq.base1.resize(sq_pixels);
    sq.overlay.resize(sq_pixels);
    int k = 0;
    for (int r = sq.row; r < sq.row + spec.square_side; ++r) {
      for (int c = sq.col; c < sq.col + spec.square_side; ++c, ++k) {
        const int idx = r * spec.image_side + c;
        sq.base0[k] = e.features[idx];
        sq.base1[k] = e.features[pixels + idx];
        sq.overlay[k] = spec.square_strength + rng.normal(0.0, spec.noise_sigma);
      }
    }
    e.square = std::move(sq);
    rebuild_square_blocks(e, spec.image_side, spec.square_side);
    ds.examples.push_back(std::move(e));
  }
  return ds;
}

Dataset generate_continuous_attr(const ContinuousAttrSpec& spec, std::uint64_t seed) {
  if (spec.n <= 0) throw InputError("generate_continuous_attr: n must be positive");
  if (!(spec.a_min < spec.a_max))
    throw InputError("generate_continuous_attr: need a_min < a_max");
  if (spec.noise_sigma < 0) throw InputError("generate_continuous_attr: noise_sigma must be >= 0");
  if (spec.attr_block < 1 || spec.attr_block >= spec.n_features)
    throw InputError("generate_continuous_attr: attr_block must be in [1, n_features)");

  const int signal_dim = spec.n_features - spec.attr_block;
  const std::vector<double> pattern = signal_pattern(signal_dim, /*variant=*/2);

  Dataset ds;
  ds.attribute_kind = AttributeKind::kContinuous;
  ds.examples.reserve(spec.n);

  Rng rng(seed);
  const double mid = (spec.a_min + spec.a_max) / 2.0;
  const double half = (spec.a_max - spec.a_min) / 2.0;

  for (int i = 0; i < spec.n; ++i) {
    Example e;
    e.id = i;
    e.attribute = rng.uniform(spec.a_min, spec.a_max);
    e.label = rng.bernoulli(sigmoid(spec.beta0 + spec.beta1 * e.attribute)) ? 1 : 0;

    const double a_norm = (e.attribute - mid) / half;  // [-1, 1]
    const double shift = (e.label == 1 ? 0.5 : -0.5) * spec.signal_strength;
    e.features.resize(spec.n_features);
    for (int d = 0; d < spec.attr_block; ++d)
      e.features[d] = spec.coupling * a_norm + rng.normal(0.0, spec.noise_sigma);
    for (int d = 0; d < signal_dim; ++d)
      e.features[spec.attr_block + d] = shift * pattern[d] + rng.normal(0.0, spec.noise_sigma);
    ds.examples.push_back(std::move(e));
  }

  const auto y = ds.labels();
  const bool has_pos = std::find(y.begin(), y.end(), 1) != y.end();
  const bool has_neg = std::find(y.begin(), y.end(), 0) != y.end();
  if (!has_pos || !has_neg)
    throw InputError("generate_continuous_attr: degenerate prevalence, all labels identical");
  return ds;
}

double retain_probability(const SubsampleSpec& spec, double a) {
  return spec.m / (1.0 + std::exp(-spec.k * (a - spec.a0)));
}

Dataset subsample(const Dataset& dataset, const SubsampleSpec& spec, std::uint64_t seed) {
  if (dataset.attribute_kind != AttributeKind::kContinuous)
    throw UnsupportedError("subsample: requires a continuous attribute");
  if (spec.m <= 0.0) throw InputError("subsample: m must be positive");

  Dataset out;
  out.attribute_kind = dataset.attribute_kind;
  out.image_side = dataset.image_side;
  out.square_side = dataset.square_side;

  Rng rng(derive_seed(seed, kTagSubsample));
  for (const auto& e : dataset.examples) {
    const double p_raw = retain_probability(spec, e.attribute);
    // negatives use the complement of the *unclamped* probability
    const double p_keep =
        e.label == 1 ? std::clamp(p_raw, 0.0, 1.0) : std::clamp(1.0 - p_raw, 0.0, 1.0);
    if (rng.bernoulli(p_keep)) out.examples.push_back(e);  // retained verbatim
  }
  return out;
}

double expected_subsample_gap(const Dataset& dataset, const SubsampleSpec& spec) {
  double pos_w = 0.0, pos_wa = 0.0, neg_w = 0.0, neg_wa = 0.0;
  for (const auto& e : dataset.examples) {
    const double p_raw = retain_probability(spec, e.attribute);
    if (e.label == 1) {
      const double w = std::clamp(p_raw, 0.0, 1.0);
      pos_w += w;
      pos_wa += w * e.attribute;
    } else {
      const double w = std::clamp(1.0 - p_raw, 0.0, 1.0);
      neg_w += w;
      neg_wa += w * e.attribute;
    }
  }
  if (pos_w <= 0.0 || neg_w <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return pos_wa / pos_w - neg_wa / neg_w;
}

SubsampleSpec calibrate_subsample(const Dataset& dataset, double target_gap, double a0, double m) {
  if (dataset.attribute_kind != AttributeKind::kContinuous)
    throw UnsupportedError("calibrate_subsample: requires a continuous attribute");
  if (m <= 0.0) throw InputError("calibrate_subsample: m must be positive");

  auto gap_at = [&](double k) {
    return expected_subsample_gap(dataset, {.k = k, .a0 = a0, .m = m});
  };

  // gap is monotone nondecreasing in k; bracket then bisect
  double lo = -2.0, hi = 2.0;
  for (int i = 0; i < 20 && gap_at(lo) > target_gap; ++i) lo *= 2.0;
  for (int i = 0; i < 20 && gap_at(hi) < target_gap; ++i) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double midk = (lo + hi) / 2.0;
    if (gap_at(midk) < target_gap)
      lo = midk;
    else
      hi = midk;
  }
  return {.k = (lo + hi) / 2.0, .a0 = a0, .m = m};
}

Example counterfactual_flip(const Example& example) {
  if (!example.square.has_value())
    throw UnsupportedError("counterfactual_flip: example has no attribute square");
  Example out = example;
  SquareOverlay& sq = *out.square;
  sq.channel = 1 - sq.channel;
  out.attribute = sq.channel == 0 ? 1.0 : 0.0;
  const int pixels = static_cast<int>(example.features.size()) / 2;
  const int image_side = static_cast<int>(std::lround(std::sqrt(pixels)));
  const int square_side = static_cast<int>(std::lround(std::sqrt(sq.overlay.size())));
  rebuild_square_blocks(out, image_side, square_side);
  return out;
}

Splits split(const Dataset& dataset, const SplitFractions& fractions, std::uint64_t seed) {
  const double f[3] = {fractions.train, fractions.validation, fractions.test};
  double sum = 0.0;
  for (double v : f) {
    if (v <= 0.0) throw InputError("split: fractions must be positive");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InputError("split: fractions must sum to 1");
  const std::int64_t n = static_cast<std::int64_t>(dataset.size());
  if (n < 3) throw InputError("split: dataset too small to split");

  std::vector<std::int64_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(derive_seed(seed, kTagSplit));
  rng.shuffle(idx);

  const std::int64_t b1 = std::llround(static_cast<double>(n) * f[0]);
  const std::int64_t b2 = std::llround(static_cast<double>(n) * (f[0] + f[1]));
  if (b1 <= 0 || b2 <= b1 || n <= b2) throw InputError("split: a split would be empty");

  Splits s;
  for (auto* part : {&s.train, &s.validation, &s.test}) {
    part->attribute_kind = dataset.attribute_kind;
    part->image_side = dataset.image_side;
    part->square_side = dataset.square_side;
  }
  for (std::int64_t i = 0; i < n; ++i) {
    const Example& e = dataset.examples[idx[i]];
    if (i < b1)
      s.train.examples.push_back(e);
    else if (i < b2)
      s.validation.examples.push_back(e);
    else
      s.test.examples.push_back(e);
  }
  return s;
}

DatasetStats dataset_stats(const Dataset& dataset) {
  if (dataset.empty()) throw InputError("dataset_stats: empty dataset");
  DatasetStats st;
  st.n = static_cast<std::int64_t>(dataset.size());

  auto summarize = [](const std::vector<double>& a) {
    ClassSummary s;
    s.count = static_cast<std::int64_t>(a.size());
    if (a.empty()) return s;
    s.mean_attribute = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
    if (a.size() > 1) {
      double acc = 0.0;
      for (double v : a) acc += (v - s.mean_attribute) * (v - s.mean_attribute);
      s.sd_attribute = std::sqrt(acc / static_cast<double>(a.size() - 1));
    }
    return s;
  };

  std::vector<double> a_pos, a_neg;
  for (const auto& e : dataset.examples) {
    (e.label == 1 ? a_pos : a_neg).push_back(e.attribute);
  }
  st.positives = summarize(a_pos);
  st.negatives = summarize(a_neg);
  st.prevalence = static_cast<double>(st.positives.count) / static_cast<double>(st.n);
  st.attribute_gap = st.positives.mean_attribute - st.negatives.mean_attribute;
  return st;
}

}  // namespace shortkit::data
