#include "shortkit/config.hpp"

#include <chrono>
#include <cmath>
#include <ctime>

#include <json.hpp>

#include "shortkit/errors.hpp"
#include "shortkit/io.hpp"
#include "shortkit/rng.hpp"
#include "shortkit/version.hpp"

namespace shortkit::config {

using nlohmann::json;

namespace {

constexpr std::uint64_t kTagData = 0x64617461;
constexpr std::uint64_t kTagSplit = 0x73706c69;
constexpr std::uint64_t kTagSubsample = 0x73756273;

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  throw ConfigError("config: " + path + ": " + what);
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* a : allowed) {
      if (item.key() == a) {
        ok = true;
        break;
      }
    }
    if (!ok) bad(path.empty() ? item.key() : path + "." + item.key(), "unknown key");
  }
}

const json* maybe(const json& j, const char* key) {
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double get_num(const json& j, const char* key, double def, const std::string& path) {
  const json* v = maybe(j, key);
  if (!v) return def;
  if (!v->is_number()) bad(path + "." + key, "expected a number");
  return v->get<double>();
}

int get_int(const json& j, const char* key, int def, const std::string& path) {
  const json* v = maybe(j, key);
  if (!v) return def;
  if (!v->is_number_integer()) bad(path + "." + key, "expected an integer");
  return v->get<int>();
}

std::string get_str(const json& j, const char* key, const std::string& def,
                    const std::string& path) {
  const json* v = maybe(j, key);
  if (!v) return def;
  if (!v->is_string()) bad(path + "." + key, "expected a string");
  return v->get<std::string>();
}

bool get_bool(const json& j, const char* key, bool def, const std::string& path) {
  const json* v = maybe(j, key);
  if (!v) return def;
  if (!v->is_boolean()) bad(path + "." + key, "expected a boolean");
  return v->get<bool>();
}

data::BinaryAttrSpec parse_binary(const json& j, const std::string& path) {
  check_keys(j, path,
             {"n", "image_side", "square_side", "p_red_given_y1", "p_red_given_y0",
              "noise_sigma", "signal_strength", "square_strength", "label_prevalence"});
  data::BinaryAttrSpec s;
  s.n = get_int(j, "n", s.n, path);
  s.image_side = get_int(j, "image_side", s.image_side, path);
  s.square_side = get_int(j, "square_side", s.square_side, path);
  s.p_red_given_y1 = get_num(j, "p_red_given_y1", s.p_red_given_y1, path);
  s.p_red_given_y0 = get_num(j, "p_red_given_y0", s.p_red_given_y0, path);
  s.noise_sigma = get_num(j, "noise_sigma", s.noise_sigma, path);
  s.signal_strength = get_num(j, "signal_strength", s.signal_strength, path);
  s.square_strength = get_num(j, "square_strength", s.square_strength, path);
  s.label_prevalence = get_num(j, "label_prevalence", s.label_prevalence, path);
  return s;
}

json binary_json(const data::BinaryAttrSpec& s) {
  return json{{"n", s.n},
              {"image_side", s.image_side},
              {"square_side", s.square_side},
              {"p_red_given_y1", s.p_red_given_y1},
              {"p_red_given_y0", s.p_red_given_y0},
              {"noise_sigma", s.noise_sigma},
              {"signal_strength", s.signal_strength},
              {"square_strength", s.square_strength},
              {"label_prevalence", s.label_prevalence}};
}

data::ContinuousAttrSpec parse_continuous(const json& j, const std::string& path) {
  check_keys(j, path,
             {"n", "a_min", "a_max", "beta0", "beta1", "coupling", "signal_strength",
              "noise_sigma", "n_features", "attr_block"});
  data::ContinuousAttrSpec s;
  s.n = get_int(j, "n", s.n, path);
  s.a_min = get_num(j, "a_min", s.a_min, path);
  s.a_max = get_num(j, "a_max", s.a_max, path);
  s.beta0 = get_num(j, "beta0", s.beta0, path);
  s.beta1 = get_num(j, "beta1", s.beta1, path);
  s.coupling = get_num(j, "coupling", s.coupling, path);
  s.signal_strength = get_num(j, "signal_strength", s.signal_strength, path);
  s.noise_sigma = get_num(j, "noise_sigma", s.noise_sigma, path);
  s.n_features = get_int(j, "n_features", s.n_features, path);
  s.attr_block = get_int(j, "attr_block", s.attr_block, path);
  return s;
}

json continuous_json(const data::ContinuousAttrSpec& s) {
  return json{{"n", s.n},
              {"a_min", s.a_min},
              {"a_max", s.a_max},
              {"beta0", s.beta0},
              {"beta1", s.beta1},
              {"coupling", s.coupling},
              {"signal_strength", s.signal_strength},
              {"noise_sigma", s.noise_sigma},
              {"n_features", s.n_features},
              {"attr_block", s.attr_block}};
}

DataConfig parse_data(const json& j, const std::string& path) {
  check_keys(j, path,
             {"generator", "binary_attr", "continuous_attr", "subsample", "split", "files"});
  DataConfig d;
  d.generator = get_str(j, "generator", "", path);
  if (const json* b = maybe(j, "binary_attr")) d.binary = parse_binary(*b, path + ".binary_attr");
  if (const json* c = maybe(j, "continuous_attr"))
    d.continuous = parse_continuous(*c, path + ".continuous_attr");
  if (const json* s = maybe(j, "subsample")) {
    check_keys(*s, path + ".subsample", {"k", "a0", "m"});
    data::SubsampleSpec ss;
    ss.k = get_num(*s, "k", ss.k, path + ".subsample");
    ss.a0 = get_num(*s, "a0", ss.a0, path + ".subsample");
    ss.m = get_num(*s, "m", ss.m, path + ".subsample");
    d.subsample = ss;
  }
  if (const json* s = maybe(j, "split")) {
    check_keys(*s, path + ".split", {"train", "validation", "test"});
    d.fractions.train = get_num(*s, "train", d.fractions.train, path + ".split");
    d.fractions.validation = get_num(*s, "validation", d.fractions.validation, path + ".split");
    d.fractions.test = get_num(*s, "test", d.fractions.test, path + ".split");
  }
  if (const json* f = maybe(j, "files")) {
    check_keys(*f, path + ".files", {"train", "validation", "test", "attribute"});
    d.train_path = get_str(*f, "train", "", path + ".files");
    d.validation_path = get_str(*f, "validation", "", path + ".files");
    d.test_path = get_str(*f, "test", "", path + ".files");
    const std::string kind = get_str(*f, "attribute", "continuous", path + ".files");
    if (kind == "continuous") d.files_kind = data::AttributeKind::kContinuous;
    else if (kind == "binary") d.files_kind = data::AttributeKind::kBinary;
    else bad(path + ".files.attribute", "must be 'continuous' or 'binary'");
  }
  if (d.generator.empty() && d.train_path.empty())
    bad(path, "either data.generator or data.files is required");
  if (!d.generator.empty() && d.generator != "binary_attr" && d.generator != "continuous_attr")
    bad(path + ".generator", "must be 'binary_attr' or 'continuous_attr'");
  return d;
}

nn::NetworkSpec parse_network(const json& j, const std::string& path) {
  check_keys(j, path, {"backbone", "clinical_head", "attribute_head", "grad_scale"});
  nn::NetworkSpec s;
  if (const json* bb = maybe(j, "backbone")) {
    if (!bb->is_array()) bad(path + ".backbone", "expected an array");
    int li = 0;
    for (const auto& l : *bb) {
      const std::string lp = path + ".backbone[" + std::to_string(li++) + "]";
      check_keys(l, lp, {"width", "activation"});
      nn::LayerSpec ls;
      ls.width = get_int(l, "width", 0, lp);
      const std::string act = get_str(l, "activation", "relu", lp);
      if (act == "relu") ls.activation = nn::Activation::kRelu;
      else if (act == "none") ls.activation = nn::Activation::kNone;
      else bad(lp + ".activation", "must be 'relu' or 'none'");
      s.backbone.push_back(ls);
    }
  }
  if (const json* h = maybe(j, "clinical_head")) {
    if (!h->is_array()) bad(path + ".clinical_head", "expected an array of widths");
    s.clinical_head = h->get<std::vector<int>>();
  } else {
    s.clinical_head = {1};
  }
  if (const json* h = maybe(j, "attribute_head")) {
    if (!h->is_array()) bad(path + ".attribute_head", "expected an array of widths");
    s.attribute_head = h->get<std::vector<int>>();
  } else {
    s.attribute_head = {2, 1};
  }
  s.grad_scale = get_num(j, "grad_scale", 0.0, path);
  return s;
}

json network_json(const nn::NetworkSpec& s) {
  json backbone = json::array();
  for (const auto& l : s.backbone)
    backbone.push_back(
        json{{"width", l.width},
             {"activation", l.activation == nn::Activation::kRelu ? "relu" : "none"}});
  return json{{"backbone", backbone},
              {"clinical_head", s.clinical_head},
              {"attribute_head", s.attribute_head},
              {"grad_scale", s.grad_scale}};
}

nn::TrainConfig parse_train(const json& j, const std::string& path) {
  check_keys(j, path,
             {"learning_rate", "batch_size", "epochs", "weight_decay", "attribute_loss_weight",
              "model_selection"});
  nn::TrainConfig t;
  t.learning_rate = get_num(j, "learning_rate", t.learning_rate, path);
  t.batch_size = get_int(j, "batch_size", t.batch_size, path);
  t.epochs = get_int(j, "epochs", t.epochs, path);
  t.weight_decay = get_num(j, "weight_decay", t.weight_decay, path);
  t.attribute_loss_weight = get_num(j, "attribute_loss_weight", t.attribute_loss_weight, path);
  const std::string sel = get_str(j, "model_selection", "best-validation", path);
  if (sel == "best-validation") t.model_selection = nn::ModelSelection::kBestValidation;
  else if (sel == "last") t.model_selection = nn::ModelSelection::kLast;
  else bad(path + ".model_selection", "must be 'best-validation' or 'last'");
  return t;
}

json train_json(const nn::TrainConfig& t) {
  return json{{"learning_rate", t.learning_rate},
              {"batch_size", t.batch_size},
              {"epochs", t.epochs},
              {"weight_decay", t.weight_decay},
              {"attribute_loss_weight", t.attribute_loss_weight},
              {"model_selection",
               t.model_selection == nn::ModelSelection::kBestValidation ? "best-validation"
                                                                        : "last"}};
}

probes::ProbeConfig parse_probe(const json& j, const std::string& path) {
  check_keys(j, path,
             {"learning_rate", "batch_size", "epochs", "weight_decay", "n_bootstrap",
              "hidden_layers"});
  probes::ProbeConfig p;
  p.learning_rate = get_num(j, "learning_rate", p.learning_rate, path);
  p.batch_size = get_int(j, "batch_size", p.batch_size, path);
  p.epochs = get_int(j, "epochs", p.epochs, path);
  p.weight_decay = get_num(j, "weight_decay", p.weight_decay, path);
  p.n_bootstrap = get_int(j, "n_bootstrap", p.n_bootstrap, path);
  if (const json* h = maybe(j, "hidden_layers")) p.hidden_layers = h->get<std::vector<int>>();
  return p;
}

json probe_json(const probes::ProbeConfig& p) {
  return json{{"learning_rate", p.learning_rate},
              {"batch_size", p.batch_size},
              {"epochs", p.epochs},
              {"weight_decay", p.weight_decay},
              {"n_bootstrap", p.n_bootstrap},
              {"hidden_layers", p.hidden_layers}};
}

SweepSection parse_sweep(const json& j, const std::string& path) {
  check_keys(j, path,
             {"grid", "values", "replicates", "auc_threshold", "fairness_metric", "min_included",
              "compute_bounds"});
  SweepSection s;
  if (const json* g = maybe(j, "grid")) {
    check_keys(*g, path + ".grid", {"n", "magnitude", "decades"});
    s.grid_n = get_int(*g, "n", s.grid_n, path + ".grid");
    s.grid_magnitude = get_num(*g, "magnitude", s.grid_magnitude, path + ".grid");
    s.grid_decades = get_num(*g, "decades", s.grid_decades, path + ".grid");
  }
  if (const json* v = maybe(j, "values")) {
    if (!v->is_array()) bad(path + ".values", "expected an array of numbers");
    s.explicit_grid = v->get<std::vector<double>>();
  }
  s.replicates = get_int(j, "replicates", s.replicates, path);
  s.auc_threshold = get_num(j, "auc_threshold", s.auc_threshold, path);
  s.fairness_metric = get_str(j, "fairness_metric", s.fairness_metric, path);
  s.min_included = get_int(j, "min_included", s.min_included, path);
  s.compute_bounds = get_bool(j, "compute_bounds", s.compute_bounds, path);
  return s;
}

json sweep_json(const SweepSection& s) {
  json j{{"replicates", s.replicates},
         {"auc_threshold", s.auc_threshold},
         {"fairness_metric", s.fairness_metric},
         {"min_included", s.min_included},
         {"compute_bounds", s.compute_bounds}};
  if (s.explicit_grid.empty()) {
    j["grid"] = json{{"n", s.grid_n}, {"magnitude", s.grid_magnitude},
                     {"decades", s.grid_decades}};
  } else {
    j["values"] = s.explicit_grid;
  }
  return j;
}

AnalysisSection parse_analysis(const json& j, const std::string& path) {
  check_keys(j, path, {"alpha", "bucket_edges", "fairness_metric", "n_perm"});
  AnalysisSection a;
  a.alpha = get_num(j, "alpha", a.alpha, path);
  if (const json* e = maybe(j, "bucket_edges")) a.bucket_edges = e->get<std::vector<double>>();
  a.fairness_metric = get_str(j, "fairness_metric", a.fairness_metric, path);
  a.n_perm = get_int(j, "n_perm", a.n_perm, path);
  return a;
}

json analysis_json(const AnalysisSection& a) {
  return json{{"alpha", a.alpha},
              {"bucket_edges", a.bucket_edges},
              {"fairness_metric", a.fairness_metric},
              {"n_perm", a.n_perm}};
}

}  // namespace

data::AttributeKind ExperimentConfig::attribute_kind() const {
  if (data.generator == "binary_attr") return data::AttributeKind::kBinary;
  if (data.generator == "continuous_attr") return data::AttributeKind::kContinuous;
  return data.files_kind;
}

fairness::FairnessMetric ExperimentConfig::resolved_metric(const std::string& requested) const {
  const std::string name = requested.empty() ? "auto" : requested;
  if (name == "auto") {
    return attribute_kind() == data::AttributeKind::kBinary
               ? fairness::FairnessMetric::kEqualizedOdds
               : fairness::FairnessMetric::kSeparation;
  }
  const auto metric = fairness::fairness_metric_from_name(name);
  if (metric == fairness::FairnessMetric::kEqualizedOdds &&
      attribute_kind() == data::AttributeKind::kContinuous)
    throw ConfigError("config: fairness_metric equalized_odds requires a binary attribute");
  return metric;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: JSON parse error: ") + e.what());
  }
  check_keys(j, "", {"data", "model", "sweep", "analysis", "output_dir", "seed"});

  ExperimentConfig cfg;
  if (const json* d = maybe(j, "data")) cfg.data = parse_data(*d, "data");
  else bad("data", "section is required");

  if (const json* m = maybe(j, "model")) {
    check_keys(*m, "model", {"network", "train", "probe"});
    if (const json* n = maybe(*m, "network")) cfg.model.network = parse_network(*n, "model.network");
    else cfg.model.network = parse_network(json::object(), "model.network");
    if (const json* t = maybe(*m, "train")) cfg.model.train = parse_train(*t, "model.train");
    if (const json* p = maybe(*m, "probe")) cfg.model.probe = parse_probe(*p, "model.probe");
  } else {
    cfg.model.network = parse_network(json::object(), "model.network");
  }

  if (const json* s = maybe(j, "sweep")) cfg.sweep = parse_sweep(*s, "sweep");
  if (const json* a = maybe(j, "analysis")) cfg.analysis = parse_analysis(*a, "analysis");
  cfg.output_dir = get_str(j, "output_dir", cfg.output_dir, "");
  if (const json* s = maybe(j, "seed")) {
    if (!s->is_number_unsigned() && !s->is_number_integer()) bad("seed", "expected an integer");
    cfg.seed = s->get<std::uint64_t>();
  }

  // defaults that depend on the data section
  if (cfg.model.network.backbone.empty()) {
    for (int i = 0; i < 3; ++i) cfg.model.network.backbone.push_back({10, nn::Activation::kRelu});
  }
  cfg.model.network.attribute_output = cfg.attribute_kind() == data::AttributeKind::kBinary
                                           ? nn::AttributeOutput::kBinary
                                           : nn::AttributeOutput::kContinuous;
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  return parse_config(io::read_file(path));
}

std::string config_json(const ExperimentConfig& cfg) {
  json data{{"split",
             json{{"train", cfg.data.fractions.train},
                  {"validation", cfg.data.fractions.validation},
                  {"test", cfg.data.fractions.test}}}};
  if (!cfg.data.generator.empty()) {
    data["generator"] = cfg.data.generator;
    if (cfg.data.generator == "binary_attr") data["binary_attr"] = binary_json(cfg.data.binary);
    else data["continuous_attr"] = continuous_json(cfg.data.continuous);
  } else {
    data["files"] = json{{"train", cfg.data.train_path},
                         {"validation", cfg.data.validation_path},
                         {"test", cfg.data.test_path},
                         {"attribute",
                          cfg.data.files_kind == data::AttributeKind::kBinary ? "binary"
                                                                              : "continuous"}};
  }
  if (cfg.data.subsample.has_value()) {
    data["subsample"] = json{{"k", cfg.data.subsample->k},
                             {"a0", cfg.data.subsample->a0},
                             {"m", cfg.data.subsample->m}};
  }
  json j{{"data", data},
         {"model",
          json{{"network", network_json(cfg.model.network)},
               {"train", train_json(cfg.model.train)},
               {"probe", probe_json(cfg.model.probe)}}},
         {"sweep", sweep_json(cfg.sweep)},
         {"analysis", analysis_json(cfg.analysis)},
         {"output_dir", cfg.output_dir},
         {"seed", cfg.seed}};
  return j.dump(2) + "\n";
}

std::string config_hash(const ExperimentConfig& cfg) {
  return io::hex64(io::fnv1a(config_json(cfg)));
}

data::Splits build_splits(const ExperimentConfig& cfg, std::uint64_t seed) {
  data::Splits splits;
  if (!cfg.data.generator.empty()) {
    data::Dataset ds;
    if (cfg.data.generator == "binary_attr")
      ds = data::generate_binary_attr(cfg.data.binary, derive_seed(seed, kTagData));
    else
      ds = data::generate_continuous_attr(cfg.data.continuous, derive_seed(seed, kTagData));
    splits = data::split(ds, cfg.data.fractions, derive_seed(seed, kTagSplit));
  } else {
    splits.train = io::read_dataset_csv(cfg.data.train_path, cfg.data.files_kind);
    splits.validation = io::read_dataset_csv(cfg.data.validation_path, cfg.data.files_kind);
    splits.test = io::read_dataset_csv(cfg.data.test_path, cfg.data.files_kind);
  }
  if (cfg.data.subsample.has_value()) {
    splits.train =
        data::subsample(splits.train, *cfg.data.subsample, derive_seed(seed, kTagSubsample));
  }
  return splits;
}

analysis::SweepSpec build_sweep_spec(const ExperimentConfig& cfg, const data::Splits& splits,
                                     std::uint64_t seed, int jobs) {
  analysis::SweepSpec s;
  s.lambda_grid = cfg.sweep.explicit_grid.empty()
                      ? analysis::make_lambda_grid(cfg.sweep.grid_n, cfg.sweep.grid_magnitude,
                                                   cfg.sweep.grid_decades)
                      : cfg.sweep.explicit_grid;
  s.replicates = cfg.sweep.replicates;
  s.network = cfg.model.network;
  s.network.input_width = splits.train.feature_dim();
  s.train = cfg.model.train;
  s.probe = cfg.model.probe;
  s.auc_threshold = cfg.sweep.auc_threshold;
  s.fairness_metric = cfg.resolved_metric(cfg.sweep.fairness_metric);
  s.encoding_direction = cfg.attribute_kind() == data::AttributeKind::kBinary
                             ? analysis::EncodingDirection::kScoreLike
                             : analysis::EncodingDirection::kErrorLike;
  s.bucket_edges = cfg.analysis.bucket_edges;
  s.min_included = cfg.sweep.min_included;
  s.base_seed = seed;
  s.jobs = jobs;
  return s;
}

analysis::AnalysisSpec build_analysis_spec(const ExperimentConfig& cfg,
                                           const std::string& metric_override,
                                           probes::MetricKind encoding_kind) {
  analysis::AnalysisSpec a;
  a.metric = cfg.resolved_metric(metric_override.empty() ? cfg.analysis.fairness_metric
                                                         : metric_override);
  a.encoding_direction = encoding_kind == probes::MetricKind::kMae
                             ? analysis::EncodingDirection::kErrorLike
                             : analysis::EncodingDirection::kScoreLike;
  a.alpha = cfg.analysis.alpha;
  a.min_included = cfg.sweep.min_included;
  return a;
}

std::string manifest_json(const RunManifest& m) {
  json points = json::array();
  for (const auto& p : m.points) {
    points.push_back(json{{"lambda_index", p.lambda_index},
                          {"replicate", p.replicate},
                          {"seed", p.seed},
                          {"done", p.done}});
  }
  json j{{"config_hash", m.config_hash},
         {"tool_version", m.tool_version},
         {"master_seed", m.master_seed},
         {"started_at", m.started_at},
         {"finished_at", m.finished_at},
         {"points", points},
         {"outputs", m.outputs}};
  if (m.has_bounds) {
    j["bounds"] = json{{"leb", m.leb}, {"ueb", m.ueb}, {"kind", m.bounds_kind}};
  }
  return j.dump(2) + "\n";
}

RunManifest parse_manifest(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("manifest: JSON parse error: ") + e.what());
  }
  RunManifest m;
  m.config_hash = j.at("config_hash").get<std::string>();
  m.tool_version = j.at("tool_version").get<std::string>();
  m.master_seed = j.at("master_seed").get<std::uint64_t>();
  m.started_at = j.value("started_at", "");
  m.finished_at = j.value("finished_at", "");
  for (const auto& p : j.at("points")) {
    ManifestPoint mp;
    mp.lambda_index = p.at("lambda_index").get<int>();
    mp.replicate = p.at("replicate").get<int>();
    mp.seed = p.at("seed").get<std::uint64_t>();
    mp.done = p.at("done").get<bool>();
    m.points.push_back(mp);
  }
  if (j.contains("outputs")) m.outputs = j["outputs"].get<std::vector<std::string>>();
  if (j.contains("bounds")) {
    m.has_bounds = true;
    m.leb = j["bounds"].at("leb").get<double>();
    m.ueb = j["bounds"].at("ueb").get<double>();
    m.bounds_kind = j["bounds"].value("kind", "");
  }
  return m;
}

std::string verdict_json(const analysis::ShortVerdict& v) {
  json j{{"rho", v.rho},
         {"p", v.p_two_sided},
         {"n_included", v.n_included},
         {"n_excluded", v.n_excluded},
         {"expected_sign", v.expected_sign < 0 ? "negative" : "positive"},
         {"shortcut_detected", v.shortcut_detected},
         {"degenerate", v.degenerate},
         {"alpha", v.alpha},
         {"metric", fairness::fairness_metric_name(v.metric)},
         {"encoding_kind", probes::metric_kind_name(v.encoding_kind)}};
  return j.dump(2) + "\n";
}

std::string compare_json(const analysis::CompareResult& r, const std::string& metric,
                         const std::string& encoding_kind, std::uint64_t seed) {
  json j{{"rho_a", r.rho_a},
         {"rho_b", r.rho_b},
         {"difference", r.difference},
         {"p", r.p},
         {"n_perm", r.n_perm},
         {"metric", metric},
         {"encoding_kind", encoding_kind},
         {"seed", seed}};
  return j.dump(2) + "\n";
}

std::string dataset_sidecar_json(const ExperimentConfig& cfg, std::uint64_t seed) {
  json j{{"tool_version", kVersion}, {"seed", seed}};
  if (cfg.data.generator == "binary_attr") {
    j["generator"] = "binary_attr";
    j["spec"] = binary_json(cfg.data.binary);
  } else if (cfg.data.generator == "continuous_attr") {
    j["generator"] = "continuous_attr";
    j["spec"] = continuous_json(cfg.data.continuous);
  }
  if (cfg.data.subsample.has_value()) {
    j["subsample"] = json{{"k", cfg.data.subsample->k},
                          {"a0", cfg.data.subsample->a0},
                          {"m", cfg.data.subsample->m}};
  }
  j["split"] = json{{"train", cfg.data.fractions.train},
                    {"validation", cfg.data.fractions.validation},
                    {"test", cfg.data.fractions.test}};
  return j.dump(2) + "\n";
}

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace shortkit::config
