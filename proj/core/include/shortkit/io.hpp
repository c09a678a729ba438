#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shortkit/analysis.hpp"
#include "shortkit/dataset.hpp"
#include "shortkit/nn.hpp"

namespace shortkit::io {

/// Locale-independent shortest round-trip formatting ('.' decimal separator).
std::string format_double(double v);
double parse_double(const std::string& s);

std::string read_file(const std::string& path);

/// Write-temp-then-rename. Creates parent directories. Throws IoError.
void atomic_write(const std::string& path, const std::string& content);

std::uint64_t fnv1a(const std::string& s);
std::string hex64(std::uint64_t v);

/// Columnar dataset CSV: id,label,attribute,f0..fD.
std::string dataset_csv_string(const data::Dataset& ds);
void write_dataset_csv(const std::string& path, const data::Dataset& ds);
data::Dataset read_dataset_csv(const std::string& path, data::AttributeKind kind);

/// Sweep CSV, one row per point:
/// lambda,replicate,seed,clinical_auc,encoding_kind,encoding_value,
/// encoding_ci_lo,encoding_ci_hi,separation,tpr_slope,fpr_slope,independence,
/// sufficiency,equalized_odds,max_gap,excluded,exclude_reason
std::string sweep_csv_string(const std::vector<analysis::SweepPoint>& points);
void write_sweep_csv(const std::string& path, const std::vector<analysis::SweepPoint>& points);
std::vector<analysis::SweepPoint> read_sweep_csv(const std::string& path);

/// Trained parameters as versioned JSON.
std::string params_json_string(const nn::TrainResult& model);
void save_params_json(const std::string& path, const nn::TrainResult& model);
nn::TrainResult load_params_json(const std::string& path);

}  // namespace shortkit::io
