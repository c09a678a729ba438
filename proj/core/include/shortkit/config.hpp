#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shortkit/analysis.hpp"
#include "shortkit/datagen.hpp"
#include "shortkit/nn.hpp"
#include "shortkit/probes.hpp"

namespace shortkit::config {

/// Data section: either an inline generator or pre-split dataset files.
struct DataConfig {
  std::string generator;  // "binary_attr" | "continuous_attr" | "" for files
  data::BinaryAttrSpec binary;
  data::ContinuousAttrSpec continuous;
  std::optional<data::SubsampleSpec> subsample;  // applied to the train split
  data::SplitFractions fractions;
  std::string train_path, validation_path, test_path;  // files mode
  data::AttributeKind files_kind = data::AttributeKind::kContinuous;
};

struct ModelConfig {
  nn::NetworkSpec network;
  nn::TrainConfig train;
  probes::ProbeConfig probe;
};

struct SweepSection {
  std::vector<double> explicit_grid;  // empty: construct from n/magnitude/decades
  int grid_n = 25;
  double grid_magnitude = 0.1;
  double grid_decades = 3.0;
  int replicates = 5;
  double auc_threshold = 0.8;
  std::string fairness_metric = "auto";  // auto: separation (continuous A) / equalized_odds (binary A)
  int min_included = 10;
  bool compute_bounds = true;
};

struct AnalysisSection {
  double alpha = 0.05;
  std::vector<double> bucket_edges;  // empty: 4 equal-width buckets over test A range
  std::string fairness_metric = "auto";
  int n_perm = 10000;
};

struct ExperimentConfig {
  DataConfig data;
  ModelConfig model;
  SweepSection sweep;
  AnalysisSection analysis;
  std::string output_dir = "out";
  std::uint64_t seed = 0;

  data::AttributeKind attribute_kind() const;
  fairness::FairnessMetric resolved_metric(const std::string& requested) const;
};

/// Strict parse: unknown keys are rejected with a field-path diagnostic
/// (throws ConfigError).
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string config_json(const ExperimentConfig& cfg);

/// Hash of the canonical serialized config, for manifests.
std::string config_hash(const ExperimentConfig& cfg);

/// Materialize the configured dataset pipeline: generate (or load), split,
/// subsample the train split.
data::Splits build_splits(const ExperimentConfig& cfg, std::uint64_t seed);

/// Assemble the sweep spec from the config sections; splits supply the input
/// width and attribute kind.
analysis::SweepSpec build_sweep_spec(const ExperimentConfig& cfg, const data::Splits& splits,
                                     std::uint64_t seed, int jobs);
analysis::AnalysisSpec build_analysis_spec(const ExperimentConfig& cfg,
                                           const std::string& metric_override,
                                           probes::MetricKind encoding_kind);

struct ManifestPoint {
  int lambda_index = 0;
  int replicate = 0;
  std::uint64_t seed = 0;
  bool done = false;
};

struct RunManifest {
  std::string config_hash;
  std::string tool_version;
  std::uint64_t master_seed = 0;
  std::string started_at, finished_at;
  std::vector<ManifestPoint> points;
  std::vector<std::string> outputs;
  bool has_bounds = false;
  double leb = 0.0, ueb = 0.0;
  std::string bounds_kind;
};

std::string manifest_json(const RunManifest& m);
RunManifest parse_manifest(const std::string& json_text);

std::string verdict_json(const analysis::ShortVerdict& v);
std::string compare_json(const analysis::CompareResult& r, const std::string& metric,
                         const std::string& encoding_kind, std::uint64_t seed);

/// Sidecar JSON describing how a dataset was generated.
std::string dataset_sidecar_json(const ExperimentConfig& cfg, std::uint64_t seed);

std::string now_iso8601();

}  // namespace shortkit::config
