#include "shortkit/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "shortkit/errors.hpp"
#include "shortkit/rng.hpp"

namespace shortkit::analysis {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kTagPoint = 0x706f696e;
constexpr std::uint64_t kTagProbe = 0x70726f62;
constexpr std::uint64_t kTagStudyRun = 0x73747564;

std::vector<double> midranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = mid;
    i = j + 1;
  }
  return ranks;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return kNan;
  return sxy / std::sqrt(sxx * syy);
}

// regularized incomplete beta via Lentz continued fraction
double betacf(double a, double b, double x) {
  const int max_iter = 300;
  const double eps = 3e-16, fpmin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h;
}

double reg_inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log1p(-x);
  const double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
  return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

// two-sided tail of Student's t with nu degrees of freedom
double t_two_sided(double t, double nu) {
  const double x = nu / (nu + t * t);
  return reg_inc_beta(nu / 2.0, 0.5, x);
}

}  // namespace

std::vector<double> make_lambda_grid(int n, double magnitude, double decades) {
  if (n < 3 || n % 2 == 0) throw ConfigError("make_lambda_grid: n must be odd and >= 3");
  if (magnitude <= 0.0) throw ConfigError("make_lambda_grid: magnitude must be positive");
  if (decades <= 0.0) throw ConfigError("make_lambda_grid: decades must be positive");

  const int half = (n - 1) / 2;
  std::vector<double> mags(half);
  for (int k = 0; k < half; ++k) {
    const double frac = half == 1 ? 0.0
                                  : static_cast<double>(half - 1 - k) / (half - 1);  // 1..0
    mags[k] = magnitude * std::pow(10.0, -decades * frac);
  }
  std::vector<double> grid;
  grid.reserve(n);
  for (int k = half - 1; k >= 0; --k) grid.push_back(-mags[k]);
  grid.push_back(0.0);
  for (int k = 0; k < half; ++k) grid.push_back(mags[k]);
  return grid;
}

void SweepSpec::validate() const {
  if (lambda_grid.empty()) throw ConfigError("SweepSpec: empty lambda grid");
  if (!std::is_sorted(lambda_grid.begin(), lambda_grid.end()))
    throw ConfigError("SweepSpec: lambda grid must be sorted");
  if (std::find(lambda_grid.begin(), lambda_grid.end(), 0.0) == lambda_grid.end())
    throw ConfigError("SweepSpec: lambda grid must contain 0");
  if (replicates < 1) throw ConfigError("SweepSpec: replicates must be >= 1");
  if (jobs < 1) throw ConfigError("SweepSpec: jobs must be >= 1");
  if (min_included < 3) throw ConfigError("SweepSpec: min_included must be >= 3");
  network.validate();
  if (!network.has_clinical() || !network.has_attribute())
    throw ConfigError("SweepSpec: the sweep network needs both heads");
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw InputError("spearman: length mismatch");
  if (x.size() < 3) throw InputError("spearman: need at least 3 pairs");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw InputError("spearman: non-finite value");
  }
  return pearson(midranks(x), midranks(y));
}

double spearman_p(double rho, int n) {
  if (n < 4) throw InputError("spearman_p: need n >= 4");
  if (!std::isfinite(rho)) throw InputError("spearman_p: rho must be finite");
  rho = std::clamp(rho, -1.0, 1.0);

  if (n <= 9) {
    // exact null distribution over permutations of untied ranks
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 1);
    const double denom = static_cast<double>(n) * (static_cast<double>(n) * n - 1.0);
    const double abs_obs = std::abs(rho) - 1e-12;
    std::int64_t count = 0, total = 0;
    do {
      double d2 = 0.0;
      for (int i = 0; i < n; ++i) {
        const double d = perm[i] - (i + 1);
        d2 += d * d;
      }
      const double r = 1.0 - 6.0 * d2 / denom;
      if (std::abs(r) >= abs_obs) ++count;
      ++total;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(count) / static_cast<double>(total);
  }

  if (std::abs(rho) >= 1.0) return 0.0;
  const double nu = n - 2;
  const double t = rho * std::sqrt(nu / (1.0 - rho * rho));
  return t_two_sided(std::abs(t), nu);
}

double encoding_value(const SweepPoint& p) { return p.encoding.value; }

double fairness_value(const SweepPoint& p, FairnessMetric m) { return p.fairness.metric(m); }

namespace {

SweepPoint run_one_point(const data::Splits& splits, const SweepSpec& spec, int lambda_index,
                         int replicate) {
  SweepPoint point;
  point.lambda_index = lambda_index;
  point.lambda = spec.lambda_grid[lambda_index];
  point.replicate = replicate;
  point.seed = derive_seed(spec.base_seed, kTagPoint,
                           static_cast<std::uint64_t>(lambda_index),
                           static_cast<std::uint64_t>(replicate));
  point.clinical_auc = kNan;
  point.encoding.value = kNan;
  point.encoding.ci_lo = point.encoding.ci_hi = kNan;
  point.fairness.separation_s = point.fairness.tpr_slope = point.fairness.fpr_slope = kNan;
  point.fairness.independence = point.fairness.sufficiency = kNan;
  point.fairness.equalized_odds = point.fairness.max_gap = kNan;

  try {
    nn::NetworkSpec net = spec.network;
    net.grad_scale = point.lambda;
    nn::TrainConfig tc = spec.train;
    tc.seed = point.seed;

    const nn::TrainResult model = nn::train(net, splits.train, splits.validation, tc);

    const std::vector<double> val_scores =
        nn::clinical_scores(net, model.params, splits.validation);
    const double threshold =
        fairness::max_f1_threshold(val_scores, splits.validation.labels());

    const std::vector<double> test_scores = nn::clinical_scores(net, model.params, splits.test);
    point.fairness = fairness::compute_report(test_scores, splits.test.labels(),
                                              splits.test.attributes(),
                                              splits.test.attribute_kind, threshold,
                                              spec.bucket_edges);
    point.clinical_auc = point.fairness.clinical_auc;

    probes::ProbeConfig pc = spec.probe;
    pc.seed = derive_seed(point.seed, kTagProbe);
    point.encoding = probes::attribute_transfer_probe(net, model.params, splits.train,
                                                      splits.validation, splits.test, pc);

    if (point.clinical_auc < spec.auc_threshold) {
      point.excluded = true;
      point.exclude_reason = "auc_below_threshold";
    }
  } catch (const DivergenceError& e) {
    point.excluded = true;
    point.exclude_reason = std::string("training_diverged: ") + e.what();
  } catch (const std::exception& e) {
    point.excluded = true;
    point.exclude_reason = std::string("error: ") + e.what();
  }
  return point;
}

}  // namespace

std::vector<SweepPoint> run_sweep(const data::Splits& splits, const SweepSpec& spec,
                                  const std::vector<SweepPoint>* resume_points,
                                  const PointCallback& on_point) {
  spec.validate();
  if (splits.train.empty() || splits.validation.empty() || splits.test.empty())
    throw InputError("run_sweep: empty split");

  const int n_lambda = static_cast<int>(spec.lambda_grid.size());
  const int total = n_lambda * spec.replicates;
  std::vector<SweepPoint> points(total);
  std::vector<char> prefilled(total, 0);

  if (resume_points != nullptr) {
    for (const auto& p : *resume_points) {
      if (p.lambda_index < 0 || p.lambda_index >= n_lambda || p.replicate < 0 ||
          p.replicate >= spec.replicates)
        continue;
      const int k = p.lambda_index * spec.replicates + p.replicate;
      const std::uint64_t expected = derive_seed(spec.base_seed, kTagPoint,
                                                 static_cast<std::uint64_t>(p.lambda_index),
                                                 static_cast<std::uint64_t>(p.replicate));
      if (p.seed != expected)
        throw ConfigError("run_sweep: resume point seed mismatch; stale sweep output");
      points[k] = p;
      prefilled[k] = 1;
    }
  }

  std::atomic<int> next{0};
  std::atomic<int> done{0};
  std::mutex cb_mutex;

  auto worker = [&]() {
    for (;;) {
      const int k = next.fetch_add(1);
      if (k >= total) return;
      const int li = k / spec.replicates;
      const int rep = k % spec.replicates;
      if (!prefilled[k]) points[k] = run_one_point(splits, spec, li, rep);
      const int d = done.fetch_add(1) + 1;
      if (on_point) {
        std::lock_guard<std::mutex> lock(cb_mutex);
        on_point(points[k], d, total);
      }
    }
  };

  const int n_threads = std::max(1, std::min(spec.jobs, total));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  const bool any_included =
      std::any_of(points.begin(), points.end(), [](const SweepPoint& p) { return !p.excluded; });
  if (!any_included)
    throw SweepDegenerateError("run_sweep: every point was excluded");
  return points;
}

ShortVerdict short_test(const std::vector<SweepPoint>& points, const AnalysisSpec& spec) {
  ShortVerdict v;
  v.alpha = spec.alpha;
  v.metric = spec.metric;
  v.expected_sign = spec.encoding_direction == EncodingDirection::kErrorLike ? -1 : +1;

  std::vector<double> enc, fair;
  for (const auto& p : points) {
    if (p.excluded) {
      ++v.n_excluded;
      continue;
    }
    enc.push_back(encoding_value(p));
    fair.push_back(fairness_value(p, spec.metric));
    v.encoding_kind = p.encoding.metric_kind;
  }
  v.n_included = static_cast<int>(enc.size());
  if (points.empty() || v.n_included == 0)
    throw SweepDegenerateError("short_test: no included points");
  if (v.n_included < spec.min_included)
    throw UnderpoweredError("short_test: only " + std::to_string(v.n_included) +
                            " included points, need " + std::to_string(spec.min_included));
  for (std::size_t i = 0; i < fair.size(); ++i) {
    if (!std::isfinite(fair[i]))
      throw InputError("short_test: fairness metric undefined on an included point; "
                       "select a metric defined for this sweep");
    if (!std::isfinite(enc[i]))
      throw InputError("short_test: encoding value undefined on an included point");
  }

  const double rho = spearman(enc, fair);
  if (std::isnan(rho)) {
    v.degenerate = true;
    v.rho = 0.0;
    v.p_two_sided = 1.0;
    v.shortcut_detected = false;
    return v;
  }
  v.rho = rho;
  v.p_two_sided = spearman_p(rho, v.n_included);
  const int sign = rho > 0.0 ? 1 : (rho < 0.0 ? -1 : 0);
  v.shortcut_detected = v.p_two_sided < spec.alpha && sign == v.expected_sign;
  return v;
}

CompareResult compare_short(const std::vector<SweepPoint>& points_a,
                            const std::vector<SweepPoint>& points_b, const AnalysisSpec& spec,
                            int n_perm, std::uint64_t seed) {
  if (n_perm < 1) throw ConfigError("compare_short: n_perm must be >= 1");

  auto collect = [&](const std::vector<SweepPoint>& pts) {
    std::vector<std::pair<double, double>> out;
    for (const auto& p : pts) {
      if (p.excluded) continue;
      const double e = encoding_value(p);
      const double f = fairness_value(p, spec.metric);
      if (!std::isfinite(e) || !std::isfinite(f))
        throw InputError("compare_short: undefined metric on an included point");
      out.push_back({e, f});
    }
    if (static_cast<int>(out.size()) < spec.min_included)
      throw UnderpoweredError("compare_short: too few included points");
    return out;
  };

  auto rho_of = [](const std::vector<std::pair<double, double>>& pts) {
    std::vector<double> x, y;
    x.reserve(pts.size());
    y.reserve(pts.size());
    for (const auto& [e, f] : pts) {
      x.push_back(e);
      y.push_back(f);
    }
    return spearman(x, y);
  };

  const auto a = collect(points_a);
  const auto b = collect(points_b);

  CompareResult result;
  result.n_perm = n_perm;
  result.rho_a = rho_of(a);
  result.rho_b = rho_of(b);
  if (std::isnan(result.rho_a) || std::isnan(result.rho_b))
    throw InputError("compare_short: degenerate correlation in an input sweep");
  result.difference = std::abs(result.rho_a - result.rho_b);

  std::vector<std::pair<double, double>> pool;
  pool.insert(pool.end(), a.begin(), a.end());
  pool.insert(pool.end(), b.begin(), b.end());

  Rng rng(seed);
  std::int64_t count = 0;
  int drawn = 0;
  long attempts = 0;
  const long max_attempts = 100L * n_perm;
  while (drawn < n_perm) {
    if (++attempts > max_attempts)
      throw InputError("compare_short: degenerate permutations; cannot build the null");
    rng.shuffle(pool);
    std::vector<std::pair<double, double>> pa(pool.begin(), pool.begin() + a.size());
    std::vector<std::pair<double, double>> pb(pool.begin() + a.size(), pool.end());
    const double ra = rho_of(pa);
    const double rb = rho_of(pb);
    if (std::isnan(ra) || std::isnan(rb)) continue;  // redraw
    ++drawn;
    if (std::abs(ra - rb) >= result.difference - 1e-12) ++count;
  }
  result.p = static_cast<double>(1 + count) / static_cast<double>(1 + n_perm);
  return result;
}

StudyResult replicate_study(const StudySpec& spec) {
  if (spec.n_runs < 1) throw ConfigError("replicate_study: n_runs must be >= 1");
  if (spec.alpha < 0.0 || spec.alpha > 1.0)
    throw ConfigError("replicate_study: alpha must be in [0,1]");

  StudyResult result;
  result.n_runs = spec.n_runs;
  result.alpha_effective = spec.correction == Correction::kBonferroni
                               ? spec.alpha / spec.n_runs
                               : spec.alpha;
  result.runs.resize(spec.n_runs);

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= spec.n_runs) return;
      StudyRun& run = result.runs[r];
      const std::uint64_t run_seed =
          derive_seed(spec.seed, kTagStudyRun, static_cast<std::uint64_t>(r));
      try {
        Rng rng(derive_seed(run_seed, 0x636f7272));
        run.p_red_y1 = rng.uniform(spec.p_red_y1_lo, spec.p_red_y1_hi);
        run.p_red_y0 = rng.uniform(spec.p_red_y0_lo, spec.p_red_y0_hi);

        data::BinaryAttrSpec dspec = spec.data;
        dspec.p_red_given_y1 = run.p_red_y1;
        dspec.p_red_given_y0 = run.p_red_y0;
        const data::Dataset ds = data::generate_binary_attr(dspec, derive_seed(run_seed, 0x64617461));
        const data::Splits splits = data::split(ds, spec.fractions, derive_seed(run_seed, 0x73706c69));

        SweepSpec sweep = spec.sweep;
        sweep.base_seed = derive_seed(run_seed, 0x73776565);
        sweep.jobs = 1;  // parallelism is across runs
        const auto points = run_sweep(splits, sweep);

        AnalysisSpec aspec;
        aspec.metric = sweep.fairness_metric;
        aspec.encoding_direction = sweep.encoding_direction;
        aspec.alpha = result.alpha_effective;
        aspec.min_included = sweep.min_included;
        run.verdict = short_test(points, aspec);
        run.significant = run.verdict.shortcut_detected;
      } catch (const std::exception& e) {
        run.failed = true;
        run.note = e.what();
      }
    }
  };

  const int n_threads = std::max(1, std::min(spec.jobs, spec.n_runs));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  for (const auto& run : result.runs) {
    if (run.significant) ++result.n_significant;
  }
  return result;
}

}  // namespace shortkit::analysis
