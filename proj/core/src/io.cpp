#include "shortkit/io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "shortkit/errors.hpp"

namespace shortkit::io {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw InputError("cannot parse number: '" + s + "'");
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void atomic_write(const std::string& path, const std::string& content) {
  const fs::path target(path);
  std::error_code ec;
  if (target.has_parent_path()) {
    fs::create_directories(target.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + target.parent_path().string() + ": " +
                          ec.message());
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  fs::rename(tmp, target, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path + ": " + ec.message());
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xF];
    v >>= 4;
  }
  return out;
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      lines.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  return lines;
}

}  // namespace

std::string dataset_csv_string(const data::Dataset& ds) {
  std::ostringstream out;
  const int dim = ds.feature_dim();
  out << "id,label,attribute";
  for (int d = 0; d < dim; ++d) out << ",f" << d;
  out << "\n";
  for (const auto& e : ds.examples) {
    out << e.id << "," << e.label << "," << format_double(e.attribute);
    for (double f : e.features) out << "," << format_double(f);
    out << "\n";
  }
  return out.str();
}

void write_dataset_csv(const std::string& path, const data::Dataset& ds) {
  atomic_write(path, dataset_csv_string(ds));
}

data::Dataset read_dataset_csv(const std::string& path, data::AttributeKind kind) {
  const std::string text = read_file(path);
  const auto lines = split_lines(text);
  if (lines.empty()) throw InputError("dataset CSV is empty: " + path);
  const auto header = csv_split(lines[0]);
  if (header.size() < 4 || header[0] != "id" || header[1] != "label" ||
      header[2] != "attribute" || header[3] != "f0")
    throw InputError("dataset CSV has an unexpected header: " + path);
  const std::size_t dim = header.size() - 3;

  data::Dataset ds;
  ds.attribute_kind = kind;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty()) continue;
    const auto f = csv_split(lines[li]);
    if (f.size() != header.size())
      throw InputError("dataset CSV row " + std::to_string(li) + " has " +
                       std::to_string(f.size()) + " fields, expected " +
                       std::to_string(header.size()));
    data::Example e;
    e.id = static_cast<std::int64_t>(parse_double(f[0]));
    e.label = static_cast<int>(parse_double(f[1]));
    e.attribute = parse_double(f[2]);
    e.features.reserve(dim);
    for (std::size_t d = 0; d < dim; ++d) e.features.push_back(parse_double(f[3 + d]));
    ds.examples.push_back(std::move(e));
  }
  if (ds.empty()) throw InputError("dataset CSV has no rows: " + path);
  return ds;
}

namespace {

const char* kSweepHeader =
    "lambda,replicate,seed,clinical_auc,encoding_kind,encoding_value,encoding_ci_lo,"
    "encoding_ci_hi,separation,tpr_slope,fpr_slope,independence,sufficiency,equalized_odds,"
    "max_gap,excluded,exclude_reason";

}  // namespace

std::string sweep_csv_string(const std::vector<analysis::SweepPoint>& points) {
  std::ostringstream out;
  out << kSweepHeader << "\n";
  for (const auto& p : points) {
    out << format_double(p.lambda) << "," << p.replicate << "," << p.seed << ","
        << format_double(p.clinical_auc) << ","
        << probes::metric_kind_name(p.encoding.metric_kind) << ","
        << format_double(p.encoding.value) << "," << format_double(p.encoding.ci_lo) << ","
        << format_double(p.encoding.ci_hi) << "," << format_double(p.fairness.separation_s)
        << "," << format_double(p.fairness.tpr_slope) << ","
        << format_double(p.fairness.fpr_slope) << "," << format_double(p.fairness.independence)
        << "," << format_double(p.fairness.sufficiency) << ","
        << format_double(p.fairness.equalized_odds) << "," << format_double(p.fairness.max_gap)
        << "," << (p.excluded ? "true" : "false") << "," << csv_escape(p.exclude_reason)
        << "\n";
  }
  return out.str();
}

void write_sweep_csv(const std::string& path, const std::vector<analysis::SweepPoint>& points) {
  atomic_write(path, sweep_csv_string(points));
}

std::vector<analysis::SweepPoint> read_sweep_csv(const std::string& path) {
  const std::string text = read_file(path);
  const auto lines = split_lines(text);
  if (lines.empty()) throw InputError("sweep CSV is empty: " + path);
  if (lines[0] != kSweepHeader)
    throw InputError("sweep CSV schema mismatch in " + path + "; expected header: " +
                     kSweepHeader);

  std::vector<analysis::SweepPoint> points;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty()) continue;
    const auto f = csv_split(lines[li]);
    if (f.size() != 17)
      throw InputError("sweep CSV row " + std::to_string(li) + " has " +
                       std::to_string(f.size()) + " fields, expected 17");
    analysis::SweepPoint p;
    p.lambda = parse_double(f[0]);
    p.replicate = static_cast<int>(parse_double(f[1]));
    {
      std::uint64_t seed = 0;
      const auto [ptr, ec] = std::from_chars(f[2].data(), f[2].data() + f[2].size(), seed);
      if (ec != std::errc() || ptr != f[2].data() + f[2].size())
        throw InputError("sweep CSV row " + std::to_string(li) + ": bad seed");
      p.seed = seed;
    }
    p.clinical_auc = parse_double(f[3]);
    if (f[4] == "mae") p.encoding.metric_kind = probes::MetricKind::kMae;
    else if (f[4] == "auroc") p.encoding.metric_kind = probes::MetricKind::kAuroc;
    else throw InputError("sweep CSV row " + std::to_string(li) + ": bad encoding_kind");
    p.encoding.value = parse_double(f[5]);
    p.encoding.ci_lo = parse_double(f[6]);
    p.encoding.ci_hi = parse_double(f[7]);
    p.fairness.separation_s = parse_double(f[8]);
    p.fairness.tpr_slope = parse_double(f[9]);
    p.fairness.fpr_slope = parse_double(f[10]);
    p.fairness.independence = parse_double(f[11]);
    p.fairness.sufficiency = parse_double(f[12]);
    p.fairness.equalized_odds = parse_double(f[13]);
    p.fairness.max_gap = parse_double(f[14]);
    p.fairness.clinical_auc = p.clinical_auc;
    if (f[15] == "true") p.excluded = true;
    else if (f[15] == "false") p.excluded = false;
    else throw InputError("sweep CSV row " + std::to_string(li) + ": bad excluded flag");
    p.exclude_reason = f[16];
    points.push_back(std::move(p));
  }

  // reconstruct lambda indices from the sorted unique lambdas
  std::vector<double> lambdas;
  for (const auto& p : points) lambdas.push_back(p.lambda);
  std::sort(lambdas.begin(), lambdas.end());
  lambdas.erase(std::unique(lambdas.begin(), lambdas.end()), lambdas.end());
  for (auto& p : points) {
    const auto it = std::lower_bound(lambdas.begin(), lambdas.end(), p.lambda);
    p.lambda_index = static_cast<int>(it - lambdas.begin());
  }
  return points;
}

namespace {

json layer_to_json(const nn::LayerParams& l) {
  return json{{"in", l.in}, {"out", l.out}, {"w", l.w}, {"b", l.b}};
}

nn::LayerParams layer_from_json(const json& j) {
  nn::LayerParams l;
  l.in = j.at("in").get<int>();
  l.out = j.at("out").get<int>();
  l.w = j.at("w").get<std::vector<double>>();
  l.b = j.at("b").get<std::vector<double>>();
  if (l.w.size() != static_cast<std::size_t>(l.in) * l.out ||
      l.b.size() != static_cast<std::size_t>(l.out))
    throw InputError("params JSON: layer shape mismatch");
  return l;
}

json spec_to_json(const nn::NetworkSpec& s) {
  json backbone = json::array();
  for (const auto& l : s.backbone)
    backbone.push_back(json{{"width", l.width},
                            {"activation", l.activation == nn::Activation::kRelu ? "relu" : "none"}});
  return json{{"input_width", s.input_width},
              {"backbone", backbone},
              {"clinical_head", s.clinical_head},
              {"attribute_head", s.attribute_head},
              {"attribute_output",
               s.attribute_output == nn::AttributeOutput::kBinary ? "binary" : "continuous"},
              {"grad_scale", s.grad_scale}};
}

nn::NetworkSpec spec_from_json(const json& j) {
  nn::NetworkSpec s;
  s.input_width = j.at("input_width").get<int>();
  for (const auto& l : j.at("backbone")) {
    const std::string act = l.at("activation").get<std::string>();
    if (act != "relu" && act != "none") throw InputError("params JSON: bad activation");
    s.backbone.push_back(
        {l.at("width").get<int>(), act == "relu" ? nn::Activation::kRelu : nn::Activation::kNone});
  }
  s.clinical_head = j.at("clinical_head").get<std::vector<int>>();
  s.attribute_head = j.at("attribute_head").get<std::vector<int>>();
  const std::string ao = j.at("attribute_output").get<std::string>();
  if (ao != "binary" && ao != "continuous") throw InputError("params JSON: bad attribute_output");
  s.attribute_output =
      ao == "binary" ? nn::AttributeOutput::kBinary : nn::AttributeOutput::kContinuous;
  s.grad_scale = j.at("grad_scale").get<double>();
  return s;
}

}  // namespace

std::string params_json_string(const nn::TrainResult& model) {
  json j;
  j["version"] = 1;
  j["spec"] = spec_to_json(model.spec);
  j["attr_mean"] = model.attr_mean;
  j["attr_sd"] = model.attr_sd;
  j["best_epoch"] = model.best_epoch;
  for (const char* block : {"backbone", "clinical", "attribute"}) {
    const auto& layers = block == std::string("backbone")
                             ? model.params.backbone
                             : (block == std::string("clinical") ? model.params.clinical
                                                                 : model.params.attribute);
    json arr = json::array();
    for (const auto& l : layers) arr.push_back(layer_to_json(l));
    j[block] = arr;
  }
  return j.dump(2) + "\n";
}

void save_params_json(const std::string& path, const nn::TrainResult& model) {
  atomic_write(path, params_json_string(model));
}

nn::TrainResult load_params_json(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw InputError("params JSON parse error in " + path + ": " + e.what());
  }
  if (!j.contains("version") || j["version"].get<int>() != 1)
    throw InputError("params JSON: unsupported version in " + path);

  nn::TrainResult model;
  model.spec = spec_from_json(j.at("spec"));
  model.attr_mean = j.at("attr_mean").get<double>();
  model.attr_sd = j.at("attr_sd").get<double>();
  model.best_epoch = j.at("best_epoch").get<int>();
  for (const auto& l : j.at("backbone")) model.params.backbone.push_back(layer_from_json(l));
  for (const auto& l : j.at("clinical")) model.params.clinical.push_back(layer_from_json(l));
  for (const auto& l : j.at("attribute")) model.params.attribute.push_back(layer_from_json(l));
  return model;
}

}  // namespace shortkit::io
