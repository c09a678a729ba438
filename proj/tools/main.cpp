// shortkit: generate synthetic bias benchmarks, sweep gradient scaling,
// and test whether fairness depends on attribute encoding.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shortkit/analysis.hpp"
#include "shortkit/config.hpp"
#include "shortkit/datagen.hpp"
#include "shortkit/errors.hpp"
#include "shortkit/fairness.hpp"
#include "shortkit/io.hpp"
#include "shortkit/nn.hpp"
#include "shortkit/probes.hpp"
#include "shortkit/rng.hpp"
#include "shortkit/version.hpp"

namespace fs = std::filesystem;
using namespace shortkit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

struct GlobalOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed_flag;
  int jobs = 1;
  std::string output_dir;
  bool fresh = false;
};

std::uint64_t resolve_seed(const GlobalOpts& g, const config::ExperimentConfig& cfg) {
  if (g.seed_flag.has_value()) return *g.seed_flag;  // flag wins over env
  if (const char* env = std::getenv("SHORTKIT_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ConfigError("SHORTKIT_SEED is not a valid unsigned integer: " + std::string(env));
    }
  }
  return cfg.seed;
}

std::string resolve_output(const GlobalOpts& g, const config::ExperimentConfig& cfg) {
  return g.output_dir.empty() ? cfg.output_dir : g.output_dir;
}

config::ExperimentConfig require_config(const GlobalOpts& g) {
  if (g.config_path.empty()) throw ConfigError("--config is required for this command");
  return config::load_config(g.config_path);
}

std::string stats_csv_row(const std::string& name, const data::DatasetStats& st) {
  std::ostringstream out;
  out << name << "," << st.n << "," << st.positives.count << "," << st.negatives.count << ","
      << io::format_double(st.prevalence) << "," << io::format_double(st.positives.mean_attribute)
      << "," << io::format_double(st.positives.sd_attribute) << ","
      << io::format_double(st.negatives.mean_attribute) << ","
      << io::format_double(st.negatives.sd_attribute) << ","
      << io::format_double(st.attribute_gap) << "\n";
  return out.str();
}

int cmd_gen(const GlobalOpts& g) {
  const auto cfg = require_config(g);
  const std::uint64_t seed = resolve_seed(g, cfg);
  const std::string out_dir = resolve_output(g, cfg);

  const data::Splits splits = config::build_splits(cfg, seed);

  io::write_dataset_csv(out_dir + "/train.csv", splits.train);
  io::write_dataset_csv(out_dir + "/validation.csv", splits.validation);
  io::write_dataset_csv(out_dir + "/test.csv", splits.test);
  io::atomic_write(out_dir + "/dataset_spec.json", config::dataset_sidecar_json(cfg, seed));

  std::string stats = "split,n,n_pos,n_neg,prevalence,mean_a_pos,sd_a_pos,mean_a_neg,sd_a_neg,gap\n";
  stats += stats_csv_row("train", data::dataset_stats(splits.train));
  stats += stats_csv_row("validation", data::dataset_stats(splits.validation));
  stats += stats_csv_row("test", data::dataset_stats(splits.test));
  io::atomic_write(out_dir + "/stats.csv", stats);

  const auto train_stats = data::dataset_stats(splits.train);
  std::cout << "wrote " << out_dir << "/{train,validation,test}.csv\n"
            << "train: n=" << train_stats.n << " prevalence="
            << io::format_double(train_stats.prevalence)
            << " attribute gap (pos-neg)=" << io::format_double(train_stats.attribute_gap)
            << "\n";
  return kExitOk;
}

config::RunManifest make_manifest(const config::ExperimentConfig& cfg,
                                  const analysis::SweepSpec& sweep, std::uint64_t seed) {
  config::RunManifest m;
  m.config_hash = config::config_hash(cfg);
  m.tool_version = kVersion;
  m.master_seed = seed;
  m.started_at = config::now_iso8601();
  const int reps = sweep.replicates;
  for (int li = 0; li < static_cast<int>(sweep.lambda_grid.size()); ++li) {
    for (int r = 0; r < reps; ++r) {
      config::ManifestPoint p;
      p.lambda_index = li;
      p.replicate = r;
      p.seed = derive_seed(sweep.base_seed, 0x706f696e, static_cast<std::uint64_t>(li),
                           static_cast<std::uint64_t>(r));
      p.done = false;
      m.points.push_back(p);
    }
  }
  return m;
}

int cmd_sweep(const GlobalOpts& g) {
  const auto cfg = require_config(g);
  const std::uint64_t seed = resolve_seed(g, cfg);
  const std::string out_dir = resolve_output(g, cfg);
  const std::string csv_path = out_dir + "/sweep.csv";
  const std::string manifest_path = out_dir + "/manifest.json";

  const data::Splits splits = config::build_splits(cfg, seed);
  analysis::SweepSpec sweep = config::build_sweep_spec(cfg, splits, seed, g.jobs);
  sweep.validate();

  config::RunManifest manifest = make_manifest(cfg, sweep, seed);

  // resume: reuse completed points recorded by a previous run of the same config
  std::vector<analysis::SweepPoint> resume;
  if (!g.fresh && fs::exists(manifest_path)) {
    config::RunManifest old;
    std::vector<analysis::SweepPoint> rows;
    try {
      old = config::parse_manifest(io::read_file(manifest_path));
      if (fs::exists(csv_path)) rows = io::read_sweep_csv(csv_path);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("refusing to resume from corrupt sweep output (") +
                        e.what() + "); rerun with --fresh");
    }
    if (old.config_hash != manifest.config_hash)
      throw ConfigError("existing sweep output was produced by a different config; "
                        "rerun with --fresh");
    std::map<std::uint64_t, config::ManifestPoint> by_seed;
    std::size_t done_count = 0;
    for (const auto& p : old.points) {
      by_seed[p.seed] = p;
      if (p.done) ++done_count;
    }
    for (const auto& row : rows) {
      const auto it = by_seed.find(row.seed);
      if (it == by_seed.end() || !it->second.done)
        throw ConfigError("sweep.csv does not match manifest.json; rerun with --fresh");
      analysis::SweepPoint p = row;
      p.lambda_index = it->second.lambda_index;
      p.replicate = it->second.replicate;
      resume.push_back(p);
    }
    if (resume.size() != done_count)
      throw ConfigError("sweep.csv is missing rows recorded in manifest.json; "
                        "rerun with --fresh");
    manifest.started_at = old.started_at;
  }

  // persist progress after each point so an interrupted sweep can resume
  std::vector<analysis::SweepPoint> completed = resume;
  auto checkpoint = [&]() {
    std::sort(completed.begin(), completed.end(),
              [](const analysis::SweepPoint& a, const analysis::SweepPoint& b) {
                return std::tie(a.lambda_index, a.replicate) < std::tie(b.lambda_index, b.replicate);
              });
    for (auto& mp : manifest.points) mp.done = false;
    for (const auto& p : completed) {
      for (auto& mp : manifest.points) {
        if (mp.seed == p.seed) mp.done = true;
      }
    }
    io::write_sweep_csv(csv_path, completed);
    io::atomic_write(manifest_path, config::manifest_json(manifest));
  };
  checkpoint();

  std::vector<std::uint64_t> resumed_seeds;
  for (const auto& p : resume) resumed_seeds.push_back(p.seed);

  auto on_point = [&](const analysis::SweepPoint& p, int done, int total) {
    if (std::find(resumed_seeds.begin(), resumed_seeds.end(), p.seed) == resumed_seeds.end()) {
      completed.push_back(p);
      checkpoint();
    }
    std::cout << "[" << done << "/" << total << "] lambda=" << io::format_double(p.lambda)
              << " rep=" << p.replicate << " auc=" << io::format_double(p.clinical_auc)
              << " encoding=" << io::format_double(p.encoding.value)
              << (p.excluded ? " EXCLUDED(" + p.exclude_reason + ")" : "") << "\n";
  };

  std::vector<analysis::SweepPoint> points;
  try {
    points = analysis::run_sweep(splits, sweep, resume.empty() ? nullptr : &resume, on_point);
  } catch (const SweepDegenerateError&) {
    manifest.finished_at = config::now_iso8601();
    manifest.outputs = {csv_path, manifest_path};
    io::atomic_write(manifest_path, config::manifest_json(manifest));
    throw;
  }

  completed = points;
  if (cfg.sweep.compute_bounds) {
    nn::TrainConfig leb_cfg = cfg.model.train;
    leb_cfg.seed = derive_seed(seed, 0x6c6562);
    const auto leb = probes::direct_attribute_model(sweep.network, splits.train,
                                                    splits.validation, splits.test, leb_cfg,
                                                    cfg.model.probe.n_bootstrap,
                                                    derive_seed(seed, 0x6c6562, 2));
    const auto ueb = probes::constant_baseline(splits.train, splits.test,
                                               cfg.model.probe.n_bootstrap,
                                               derive_seed(seed, 0x756562));
    manifest.has_bounds = true;
    manifest.leb = leb.value;
    manifest.ueb = ueb.value;
    manifest.bounds_kind = probes::metric_kind_name(leb.metric_kind);
    std::cout << "bounds (" << manifest.bounds_kind << "): LEB=" << io::format_double(leb.value)
              << " UEB=" << io::format_double(ueb.value) << "\n";
  }
  manifest.finished_at = config::now_iso8601();
  manifest.outputs = {csv_path, manifest_path};
  checkpoint();

  int excluded = 0;
  for (const auto& p : points) excluded += p.excluded ? 1 : 0;
  std::cout << "sweep complete: " << points.size() << " points, " << excluded
            << " excluded -> " << csv_path << "\n";
  return kExitOk;
}

int cmd_analyze(const GlobalOpts& g, const std::string& csv_path, const std::string& metric_flag) {
  config::ExperimentConfig cfg;
  if (!g.config_path.empty()) cfg = config::load_config(g.config_path);
  const std::string out_dir = g.output_dir.empty()
                                  ? (g.config_path.empty() ? std::string("out") : cfg.output_dir)
                                  : g.output_dir;

  const auto points = io::read_sweep_csv(csv_path);
  if (points.empty()) throw InputError("analyze: sweep CSV has no rows");
  const probes::MetricKind kind = points.front().encoding.metric_kind;

  // the encoding kind implies the attribute kind: probes report MAE for a
  // continuous attribute and AUROC for a binary one
  analysis::AnalysisSpec spec;
  spec.alpha = g.config_path.empty() ? 0.05 : cfg.analysis.alpha;
  spec.min_included = g.config_path.empty() ? 10 : cfg.sweep.min_included;
  spec.encoding_direction = kind == probes::MetricKind::kMae
                                ? analysis::EncodingDirection::kErrorLike
                                : analysis::EncodingDirection::kScoreLike;
  std::string metric_name = metric_flag;
  if (metric_name.empty() && !g.config_path.empty()) metric_name = cfg.analysis.fairness_metric;
  if (metric_name.empty() || metric_name == "auto") {
    spec.metric = kind == probes::MetricKind::kMae ? fairness::FairnessMetric::kSeparation
                                                   : fairness::FairnessMetric::kEqualizedOdds;
  } else {
    spec.metric = fairness::fairness_metric_from_name(metric_name);
    if (spec.metric == fairness::FairnessMetric::kEqualizedOdds &&
        kind == probes::MetricKind::kMae)
      throw ConfigError("analyze: equalized_odds requires a binary-attribute sweep "
                        "(this CSV has MAE encoding)");
  }

  const analysis::ShortVerdict verdict = analysis::short_test(points, spec);

  io::atomic_write(out_dir + "/verdict.json", config::verdict_json(verdict));

  std::string scatter = "lambda,replicate,encoding_value,fairness_value,clinical_auc,excluded\n";
  for (const auto& p : points) {
    scatter += io::format_double(p.lambda) + "," + std::to_string(p.replicate) + "," +
               io::format_double(p.encoding.value) + "," +
               io::format_double(analysis::fairness_value(p, spec.metric)) + "," +
               io::format_double(p.clinical_auc) + "," + (p.excluded ? "true" : "false") + "\n";
  }
  io::atomic_write(out_dir + "/scatter.csv", scatter);

  std::ostringstream report;
  report << "ShorT analysis of " << csv_path << "\n"
         << "fairness metric: " << fairness::fairness_metric_name(spec.metric)
         << ", encoding: " << probes::metric_kind_name(kind) << "\n"
         << "included points: " << verdict.n_included << ", excluded: " << verdict.n_excluded
         << "\n";
  if (verdict.degenerate) {
    report << "verdict: degenerate (constant ranks), no shortcut detected at alpha="
           << io::format_double(verdict.alpha) << " (n=" << verdict.n_included << ")\n";
  } else {
    report << "spearman rho=" << io::format_double(verdict.rho)
           << ", two-sided p=" << io::format_double(verdict.p_two_sided)
           << " (alpha=" << io::format_double(verdict.alpha) << ", n=" << verdict.n_included
           << ", metric=" << fairness::fairness_metric_name(spec.metric) << ")\n"
           << "expected sign: " << (verdict.expected_sign < 0 ? "negative" : "positive") << "\n"
           << "shortcut detected: " << (verdict.shortcut_detected ? "YES" : "no") << "\n";
  }
  if (spec.metric == fairness::FairnessMetric::kSeparation) {
    report << "\nseparation -> performance change per decade (e^{s*10}-1):\n";
    double mean_s = 0.0;
    int n = 0;
    for (const auto& p : points) {
      if (p.excluded || !std::isfinite(p.fairness.separation_s)) continue;
      mean_s += p.fairness.separation_s;
      ++n;
    }
    if (n > 0) {
      mean_s /= n;
      report << "mean separation " << io::format_double(mean_s) << " -> "
             << io::format_double(100.0 * fairness::percent_change_per_delta(mean_s, 10.0))
             << "% per decade\n";
    }
  }
  report << "\nlambda,encoding,fairness,auc,excluded\n";
  for (const auto& p : points) {
    report << io::format_double(p.lambda) << "," << io::format_double(p.encoding.value) << ","
           << io::format_double(analysis::fairness_value(p, spec.metric)) << ","
           << io::format_double(p.clinical_auc) << "," << (p.excluded ? "true" : "false")
           << "\n";
  }
  io::atomic_write(out_dir + "/report.txt", report.str());

  std::cout << report.str();
  std::cout << "wrote " << out_dir << "/verdict.json\n";
  return kExitOk;
}

int cmd_compare(const GlobalOpts& g, const std::string& csv_a, const std::string& csv_b,
                int n_perm, const std::string& metric_flag) {
  if (n_perm < 1) throw ConfigError("compare: --n-perm must be >= 1");
  config::ExperimentConfig cfg;
  if (!g.config_path.empty()) cfg = config::load_config(g.config_path);
  const std::string out_dir = g.output_dir.empty()
                                  ? (g.config_path.empty() ? std::string("out") : cfg.output_dir)
                                  : g.output_dir;
  const std::uint64_t seed = g.seed_flag.has_value()
                                 ? *g.seed_flag
                                 : (g.config_path.empty() ? 0 : resolve_seed(g, cfg));

  const auto points_a = io::read_sweep_csv(csv_a);
  const auto points_b = io::read_sweep_csv(csv_b);
  if (points_a.empty() || points_b.empty()) throw InputError("compare: empty sweep CSV");
  const probes::MetricKind kind = points_a.front().encoding.metric_kind;
  if (points_b.front().encoding.metric_kind != kind)
    throw ConfigError("compare: the two sweeps use different encoding metrics");

  analysis::AnalysisSpec spec;
  spec.alpha = g.config_path.empty() ? 0.05 : cfg.analysis.alpha;
  spec.min_included = g.config_path.empty() ? 10 : cfg.sweep.min_included;
  spec.encoding_direction = kind == probes::MetricKind::kMae
                                ? analysis::EncodingDirection::kErrorLike
                                : analysis::EncodingDirection::kScoreLike;
  if (metric_flag.empty() || metric_flag == "auto") {
    spec.metric = kind == probes::MetricKind::kMae ? fairness::FairnessMetric::kSeparation
                                                   : fairness::FairnessMetric::kEqualizedOdds;
  } else {
    spec.metric = fairness::fairness_metric_from_name(metric_flag);
    if (spec.metric == fairness::FairnessMetric::kEqualizedOdds &&
        kind == probes::MetricKind::kMae)
      throw ConfigError("compare: equalized_odds requires binary-attribute sweeps");
  }

  const auto result = analysis::compare_short(points_a, points_b, spec, n_perm, seed);

  const std::string json = config::compare_json(result, fairness::fairness_metric_name(spec.metric),
                                                probes::metric_kind_name(kind), seed);
  io::atomic_write(out_dir + "/compare.json", json);
  std::cout << "rho_a=" << io::format_double(result.rho_a)
            << " rho_b=" << io::format_double(result.rho_b)
            << " |diff|=" << io::format_double(result.difference)
            << " p=" << io::format_double(result.p) << " (n_perm=" << result.n_perm
            << ", metric=" << fairness::fairness_metric_name(spec.metric) << ")\n"
            << "wrote " << out_dir << "/compare.json\n";
  return kExitOk;
}

int cmd_selftest(bool inject_gradient_bug) {
  int failures = 0;
  auto check = [&](const std::string& name, bool ok, const std::string& detail = "") {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name;
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << "\n";
    if (!ok) ++failures;
  };

  // gradient checks over a few architectures, both signs of lambda
  {
    Rng rng(20240901);
    const double lambdas[] = {0.0, 0.1, -0.1, 1.0};
    int gi = 0;
    for (double lambda : lambdas) {
      nn::NetworkSpec spec;
      spec.input_width = 6;
      spec.backbone = {{10, nn::Activation::kRelu},
                       {10, nn::Activation::kRelu},
                       {10, nn::Activation::kRelu}};
      spec.clinical_head = {1};
      spec.attribute_head = {2, 1};
      spec.attribute_output = gi % 2 == 0 ? nn::AttributeOutput::kContinuous
                                          : nn::AttributeOutput::kBinary;
      spec.grad_scale = lambda;
      const nn::NetworkParams params = nn::init_params(spec, 77 + gi);
      nn::Batch batch;
      batch.n = 16;
      batch.dim = 6;
      for (int i = 0; i < batch.n * batch.dim; ++i) batch.x.push_back(rng.normal());
      std::vector<int> y(batch.n);
      std::vector<double> a(batch.n);
      for (int i = 0; i < batch.n; ++i) {
        y[i] = rng.bernoulli(0.5) ? 1 : 0;
        a[i] = spec.attribute_output == nn::AttributeOutput::kBinary
                   ? (rng.bernoulli(0.5) ? 1.0 : 0.0)
                   : rng.normal();
      }
      const std::string bug = inject_gradient_bug && gi == 0 ? "backbone[1]" : "";
      const auto report = nn::gradient_check(spec, params, batch, y, a, 0.75, 1e-4, 1e-4, bug);
      std::ostringstream detail;
      detail << "lambda=" << lambda << " max_rel_err=" << report.max_rel_error;
      if (!report.passed) detail << " worst=" << report.worst_param;
      check("gradient check " + std::to_string(gi), report.passed, detail.str());
      ++gi;
    }
  }

  // scalar Adam oracle: one step with g=1, lr=0.1
  {
    std::vector<double> p{0.0}, gvec{1.0}, m{0.0}, v{0.0};
    nn::adam_step(p, gvec, m, v, 1, 0.1, 0.0);
    const double mhat = 0.1 / (1 - 0.9);
    const double vhat = 0.001 / (1 - 0.999);
    const double expected = -0.1 * mhat / (std::sqrt(vhat) + 1e-8);
    check("adam scalar oracle", std::abs(p[0] - expected) < 1e-12);
  }

  // spearman against a brute-force rank-then-pearson oracle
  {
    Rng rng(5);
    bool ok = true;
    for (int trial = 0; trial < 20 && ok; ++trial) {
      std::vector<double> x, y;
      for (int i = 0; i < 40; ++i) {
        x.push_back(std::round(rng.uniform() * 10));  // forces ties
        y.push_back(std::round(rng.uniform() * 10));
      }
      auto rank = [](const std::vector<double>& v) {
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
          double less = 0, equal = 0;
          for (double u : v) {
            if (u < v[i]) ++less;
            if (u == v[i]) ++equal;
          }
          r[i] = less + (equal + 1) / 2.0;
        }
        return r;
      };
      const auto rx = rank(x);
      const auto ry = rank(y);
      double mx = 0, my = 0;
      for (std::size_t i = 0; i < rx.size(); ++i) {
        mx += rx[i];
        my += ry[i];
      }
      mx /= rx.size();
      my /= ry.size();
      double sxy = 0, sxx = 0, syy = 0;
      for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
      }
      const double oracle = sxy / std::sqrt(sxx * syy);
      if (std::abs(analysis::spearman(x, y) - oracle) > 1e-12) ok = false;
    }
    check("spearman vs rank-then-pearson oracle", ok);
  }

  // auroc against O(n^2) pair counting
  {
    Rng rng(9);
    std::vector<double> s;
    std::vector<int> y;
    for (int i = 0; i < 200; ++i) {
      s.push_back(std::round(rng.uniform() * 20) / 20.0);
      y.push_back(rng.bernoulli(0.4) ? 1 : 0);
    }
    double num = 0, den = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (std::size_t j = 0; j < s.size(); ++j) {
        if (y[i] == 1 && y[j] == 0) {
          den += 1;
          if (s[i] > s[j]) num += 1;
          else if (s[i] == s[j]) num += 0.5;
        }
      }
    }
    check("auroc vs pair-counting oracle",
          std::abs(fairness::auroc(s, y) - num / den) < 1e-12);
  }

  // grad_scale=0 multitask shares the single-task backbone trajectory
  {
    data::ContinuousAttrSpec dspec;
    dspec.n = 400;
    dspec.beta1 = 0.05;
    dspec.beta0 = -2.5;
    const auto ds = data::generate_continuous_attr(dspec, 11);
    const auto splits = data::split(ds, {0.7, 0.15, 0.15}, 12);

    nn::NetworkSpec multi;
    multi.input_width = ds.feature_dim();
    multi.backbone = {{10, nn::Activation::kRelu}, {10, nn::Activation::kRelu}};
    multi.clinical_head = {1};
    multi.attribute_head = {2, 1};
    multi.grad_scale = 0.0;

    nn::NetworkSpec single = multi;
    single.attribute_head.clear();

    nn::TrainConfig tc;
    tc.epochs = 3;
    tc.seed = 99;
    const auto m1 = nn::train(multi, splits.train, splits.validation, tc);
    const auto m2 = nn::train(single, splits.train, splits.validation, tc);
    check("lambda=0 equals single-task backbone", m1.params.backbone_equals(m2.params));
  }

  std::cout << (failures == 0 ? "selftest: all checks passed\n"
                              : "selftest: " + std::to_string(failures) + " check(s) failed\n");
  return failures == 0 ? kExitOk : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shortkit: shortcut-learning detection toolkit"};
  app.set_version_flag("--version", kVersion);
  app.fallthrough();

  GlobalOpts g;
  app.add_option("--config", g.config_path, "experiment config JSON");
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "master seed (wins over SHORTKIT_SEED)");
  app.add_option("--jobs", g.jobs, "parallel sweep workers")->check(CLI::PositiveNumber);
  app.add_option("--output", g.output_dir, "output directory (overrides config)");
  app.add_flag("--fresh", g.fresh, "discard existing sweep output instead of resuming");

  auto* gen = app.add_subcommand("gen", "generate dataset splits and stats");
  auto* sweep = app.add_subcommand("sweep", "train the gradient-scaling sweep");
  auto* analyze = app.add_subcommand("analyze", "run the ShorT test on a sweep CSV");
  std::string analyze_csv, analyze_metric;
  analyze->add_option("csv", analyze_csv, "sweep CSV")->required();
  analyze->add_option("--metric", analyze_metric, "fairness metric (default: auto)");
  auto* compare = app.add_subcommand("compare", "permutation test between two sweeps");
  std::string compare_a, compare_b, compare_metric;
  int n_perm = 10000;
  compare->add_option("csv_a", compare_a, "first sweep CSV")->required();
  compare->add_option("csv_b", compare_b, "second sweep CSV")->required();
  compare->add_option("--n-perm", n_perm, "permutations");
  compare->add_option("--metric", compare_metric, "fairness metric (default: auto)");
  auto* selftest = app.add_subcommand("selftest", "run built-in numerical checks");
  bool inject_bug = false;
  selftest->add_flag("--inject-gradient-bug", inject_bug,
                     "negative control: corrupt one gradient and expect a failure");

  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return kExitConfig;
  }
  if (seed_opt->count() > 0) g.seed_flag = seed_value;

  try {
    if (gen->parsed()) return cmd_gen(g);
    if (sweep->parsed()) return cmd_sweep(g);
    if (analyze->parsed()) return cmd_analyze(g, analyze_csv, analyze_metric);
    if (compare->parsed()) return cmd_compare(g, compare_a, compare_b, n_perm, compare_metric);
    if (selftest->parsed()) return cmd_selftest(inject_bug);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitOk;
}
