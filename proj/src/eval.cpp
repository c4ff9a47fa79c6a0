#include "gw/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "gw/error.hpp"
#include "gw/rng.hpp"

namespace gw {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error("eval", msg); }

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

double pearson_r(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) fail("length mismatch");
  const size_t n = a.size();
  if (n < 2) fail("need at least 2 samples");
  const double mean_a = std::accumulate(a.begin(), a.end(), 0.0) / double(n);
  const double mean_b = std::accumulate(b.begin(), b.end(), 0.0) / double(n);
  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double da = a[i] - mean_a, db = b[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0.0 || var_b == 0.0) fail("undefined correlation: constant input");
  const double r = cov / std::sqrt(var_a * var_b);
  return std::clamp(r, -1.0, 1.0);
}

}  // namespace

double pearson_r2(const std::vector<double>& pred, const std::vector<double>& truth) {
  const double r = pearson_r(pred, truth);
  return r * r;
}

std::vector<double> average_ranks(const std::vector<double>& values) {
  const size_t n = values.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t i, size_t j) { return values[i] < values[j]; });
  std::vector<double> ranks(n, 0.0);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = (double(i) + double(j)) / 2.0 + 1.0;  // 1-based
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double spearman_rho2(const std::vector<double>& pred, const std::vector<double>& truth) {
  if (pred.size() != truth.size()) fail("length mismatch");
  if (pred.size() < 2) fail("need at least 2 samples");
  return pearson_r2(average_ranks(pred), average_ranks(truth));
}

Histogram rank_difference_histogram(const std::vector<double>& pred,
                                    const std::vector<double>& truth, uint32_t bins) {
  if (pred.size() != truth.size()) fail("length mismatch");
  if (bins < 1) fail("need at least 1 bin");
  const std::vector<double> rp = average_ranks(pred);
  const std::vector<double> rt = average_ranks(truth);
  Histogram h;
  const double span = pred.empty() ? 0.0 : double(pred.size() - 1);
  h.lo = -span - 0.5;
  h.hi = span + 0.5;
  h.counts.assign(bins, 0);
  const double width = (h.hi - h.lo) / double(bins);
  for (size_t i = 0; i < rp.size(); ++i) {
    const double d = rp[i] - rt[i];
    auto bin = size_t(std::clamp((d - h.lo) / width, 0.0, double(bins - 1)));
    ++h.counts[bin];
  }
  return h;
}

// --- experiment plumbing ---------------------------------------------------

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::Intra: return "intra";
    case Regime::Cross: return "cross";
    case Regime::LeaveOneOut: return "leave-one-out";
  }
  fail("bad regime value");
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::NL: return "NL";
    case ModelKind::WE: return "WE";
    case ModelKind::MM: return "MM";
  }
  fail("bad model kind value");
}

Regime regime_from_string(const std::string& s) {
  if (s == "intra") return Regime::Intra;
  if (s == "cross") return Regime::Cross;
  if (s == "leave-one-out") return Regime::LeaveOneOut;
  fail("unknown regime: " + s);
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "NL") return ModelKind::NL;
  if (s == "WE") return ModelKind::WE;
  if (s == "MM") return ModelKind::MM;
  fail("unknown model kind: " + s);
}

void ExperimentSpec::validate() const {
  if (n < 1) fail("neighbor count must be at least 1");
  if (train_countries.empty() || test_countries.empty())
    fail("train and test country lists must be non-empty");
  if (regime == Regime::Intra) {
    if (!(train_countries == test_countries))
      fail("intra regime requires train == test countries");
  }
  if (regime == Regime::LeaveOneOut) {
    for (const std::string& t : test_countries)
      if (std::find(train_countries.begin(), train_countries.end(), t) !=
          train_countries.end())
        fail("leave-one-out: test country present in training pool");
  }
}

std::vector<double> feature_slice(const FeatureVector& row, uint32_t n_use) {
  if (n_use < 1) fail("neighbor count must be at least 1");
  if (n_use > row.n) fail("insufficient articles: feature rows hold " +
                          std::to_string(row.n) + " neighbors, need " +
                          std::to_string(n_use));
  std::vector<double> out;
  out.reserve(size_t(row.p) * n_use + n_use);
  for (size_t i = 0; i < size_t(row.p) * n_use; ++i) out.push_back(row.values[i]);
  const size_t dist_base = size_t(row.p) * row.n;
  for (uint32_t k = 0; k < n_use; ++k) out.push_back(row.values[dist_base + k]);
  return out;
}

namespace {

struct SampleSet {
  std::vector<Sample> samples;
  std::vector<double> truths, lats, lons;
};

SampleSet build_samples(const std::vector<const SurveyPoint*>& points,
                        const ExperimentSpec& spec, const DataBundle& bundle) {
  const bool needs_text = spec.model_kind != ModelKind::NL;
  const bool needs_image = spec.model_kind != ModelKind::WE;

  std::unordered_map<std::string, const FeatureVector*> features;
  if (needs_text) {
    if (!bundle.features) fail("text features required for " + to_string(spec.model_kind));
    for (size_t i = 0; i < bundle.features->ids.size(); ++i)
      features.emplace(bundle.features->ids[i], &bundle.features->rows[i]);
  }
  if (needs_image && !bundle.images)
    fail("missing images for " + to_string(spec.model_kind));

  SampleSet set;
  for (const SurveyPoint* p : points) {
    Sample s;
    if (needs_text) {
      auto it = features.find(p->cluster_id);
      if (it == features.end()) fail("no features for cluster: " + p->cluster_id);
      s.text = feature_slice(*it->second, spec.n);
    }
    if (needs_image) {
      auto it = bundle.images->find(p->cluster_id);
      if (it == bundle.images->end()) fail("missing images for cluster: " + p->cluster_id);
      const ImageGrid& img = it->second;
      s.image.c = 1;
      s.image.h = img.height;
      s.image.w = img.width;
      s.image.v.assign(img.pixels.begin(), img.pixels.end());
    }
    s.target = p->outcome;
    set.samples.push_back(std::move(s));
    set.truths.push_back(p->outcome);
    set.lats.push_back(p->lat);
    set.lons.push_back(p->lon);
  }
  return set;
}

TrainOutput default_trainer(const std::vector<Sample>& train_samples,
                            const std::vector<Sample>& test_samples,
                            const ExperimentSpec& spec, const EvalContext& ctx) {
  std::unique_ptr<Regressor> model;
  const uint32_t text_dim = train_samples.empty() ? 0 : uint32_t(train_samples[0].text.size());
  const uint64_t model_seed = Rng(spec.seed).fork(7).next_u64();
  if (spec.model_kind == ModelKind::WE) {
    MlpConfig cfg;
    cfg.input_dim = text_dim;
    cfg.hidden = ctx.shapes.mlp_hidden;
    cfg.activations = ctx.shapes.mlp_activations;
    cfg.seed = model_seed;
    model = std::make_unique<MlpRegressor>(cfg);
  } else {
    MmConfig cfg;
    cfg.text_dim = spec.model_kind == ModelKind::NL ? 0 : text_dim;
    cfg.cnn = ctx.shapes.cnn;
    cfg.image_head = ctx.shapes.image_head;
    cfg.trunk = ctx.shapes.trunk;
    cfg.seed = model_seed;
    model = std::make_unique<MultiModalRegressor>(cfg);
  }
  TrainConfig tc = ctx.train;
  tc.seed = Rng(spec.seed).fork(11).next_u64();
  TrainOutput out;
  out.train_result = train(*model, train_samples, tc);
  out.predictions = predict(*model, test_samples);
  return out;
}

std::vector<const SurveyPoint*> points_for(const std::vector<SurveyPoint>& all,
                                           const std::vector<std::string>& countries) {
  std::unordered_set<std::string> wanted(countries.begin(), countries.end());
  std::vector<const SurveyPoint*> out;
  for (const SurveyPoint& p : all)
    if (wanted.count(p.country)) out.push_back(&p);
  return out;
}

// Seeded 80/20 split over distinct cluster ids (first-occurrence order).
void intra_split(const std::vector<const SurveyPoint*>& pool, uint64_t seed,
                 std::vector<const SurveyPoint*>& train_out,
                 std::vector<const SurveyPoint*>& test_out) {
  std::vector<std::string> clusters;
  std::unordered_set<std::string> seen;
  for (const SurveyPoint* p : pool)
    if (seen.insert(p->cluster_id).second) clusters.push_back(p->cluster_id);
  if (clusters.size() < 2) fail("intra split needs at least 2 clusters");

  Rng rng(seed);
  rng.shuffle(clusters);
  const size_t train_n =
      std::clamp<size_t>(size_t(double(clusters.size()) * 0.8), 1, clusters.size() - 1);
  std::unordered_set<std::string> train_clusters(clusters.begin(),
                                                 clusters.begin() + train_n);
  for (const SurveyPoint* p : pool) {
    if (train_clusters.count(p->cluster_id)) train_out.push_back(p);
    else test_out.push_back(p);
  }
}

void assert_disjoint(const std::vector<const SurveyPoint*>& train_pts,
                     const std::vector<const SurveyPoint*>& test_pts) {
  std::unordered_set<std::string> train_clusters;
  for (const SurveyPoint* p : train_pts) train_clusters.insert(p->cluster_id);
  for (const SurveyPoint* p : test_pts)
    if (train_clusters.count(p->cluster_id))
      fail("train/test cluster overlap: " + p->cluster_id);
}

}  // namespace

EvalReport run_experiment(const ExperimentSpec& spec, const DataBundle& bundle,
                          const EvalContext& ctx) {
  spec.validate();
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<const SurveyPoint*> train_pts, test_pts;
  if (spec.regime == Regime::Intra) {
    const auto pool = points_for(bundle.points, spec.train_countries);
    if (pool.empty()) fail("no survey points for requested countries");
    intra_split(pool, Rng(spec.seed).fork(3).next_u64(), train_pts, test_pts);
  } else {
    train_pts = points_for(bundle.points, spec.train_countries);
    test_pts = points_for(bundle.points, spec.test_countries);
    if (train_pts.empty()) fail("no survey points in training countries");
    if (test_pts.empty()) fail("no survey points in test countries");
  }
  assert_disjoint(train_pts, test_pts);

  SampleSet train_set = build_samples(train_pts, spec, bundle);
  SampleSet test_set = build_samples(test_pts, spec, bundle);

  TrainOutput output = ctx.trainer
                           ? ctx.trainer(train_set.samples, test_set.samples, spec)
                           : default_trainer(train_set.samples, test_set.samples, spec, ctx);
  if (output.predictions.size() != test_set.samples.size())
    fail("trainer returned wrong prediction count");

  EvalReport report;
  report.spec = spec;
  report.truths = test_set.truths;
  report.predictions = output.predictions;
  report.lats = test_set.lats;
  report.lons = test_set.lons;
  report.train_mse = output.train_result.train_mse;
  report.pearson = pearson_r2(report.predictions, report.truths);
  report.spearman = spearman_rho2(report.predictions, report.truths);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

GridResult run_grid(const std::vector<std::string>& countries, ModelKind kind,
                    uint32_t n, uint64_t seed, const std::string& outcome,
                    const DataBundle& bundle, const EvalContext& ctx) {
  if (countries.size() < 2) fail("grid needs at least 2 countries");
  GridResult grid;
  grid.test_labels = countries;
  grid.test_labels.push_back("All");
  grid.train_labels = countries;
  grid.train_labels.push_back("All");

  auto others = [&](const std::string& excluded) {
    std::vector<std::string> out;
    for (const std::string& c : countries)
      if (c != excluded) out.push_back(c);
    return out;
  };

  for (const std::string& test_c : grid.test_labels) {
    std::vector<double> row;
    for (const std::string& train_c : grid.train_labels) {
      ExperimentSpec spec;
      spec.model_kind = kind;
      spec.n = n;
      spec.outcome = outcome;
      spec.seed = seed;
      if (test_c != "All" && train_c != "All") {
        spec.regime = test_c == train_c ? Regime::Intra : Regime::Cross;
        spec.train_countries = {train_c};
        spec.test_countries = {test_c};
      } else if (test_c != "All") {  // column All: leave-one-out
        spec.regime = Regime::LeaveOneOut;
        spec.train_countries = others(test_c);
        spec.test_countries = {test_c};
      } else if (train_c != "All") {  // row All: test on the union of others
        spec.regime = Regime::Cross;
        spec.train_countries = {train_c};
        spec.test_countries = others(train_c);
      } else {  // (All, All): pooled intra split
        spec.regime = Regime::Intra;
        spec.train_countries = countries;
        spec.test_countries = countries;
      }
      try {
        row.push_back(run_experiment(spec, bundle, ctx).pearson);
      } catch (const Error&) {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
      }
    }
    grid.r2.push_back(std::move(row));
  }
  return grid;
}

// --- writers ---------------------------------------------------------------

void write_report_json(const EvalReport& report, std::ostream& out) {
  nlohmann::json j;
  j["spec"] = {
      {"regime", to_string(report.spec.regime)},
      {"train_countries", report.spec.train_countries},
      {"test_countries", report.spec.test_countries},
      {"model_kind", to_string(report.spec.model_kind)},
      {"n", report.spec.n},
      {"outcome", report.spec.outcome},
      {"seed", report.spec.seed},
  };
  j["pearson_r2"] = report.pearson;
  j["spearman_rho2"] = report.spearman;
  j["test_points"] = report.truths.size();
  j["epochs_run"] = report.train_mse.size();
  j["train_mse"] = report.train_mse;
  j["wall_seconds"] = report.wall_seconds;
  nlohmann::json pts = nlohmann::json::array();
  for (size_t i = 0; i < report.truths.size(); ++i) {
    pts.push_back({{"lat", report.lats[i]},
                   {"lon", report.lons[i]},
                   {"truth", report.truths[i]},
                   {"pred", report.predictions[i]}});
  }
  j["points"] = std::move(pts);
  out << j.dump(2) << '\n';
}

void write_matrix_csv(const GridResult& grid, std::ostream& out) {
  out << "tested_on";
  for (const std::string& c : grid.train_labels) out << ',' << c;
  out << '\n';
  for (size_t r = 0; r < grid.test_labels.size(); ++r) {
    out << grid.test_labels[r];
    for (double v : grid.r2[r]) out << ',' << fmt_double(v);
    out << '\n';
  }
}

void write_predictions_csv(const EvalReport& report, std::ostream& out) {
  out << "lat,lon,truth,pred\n";
  for (size_t i = 0; i < report.truths.size(); ++i) {
    out << fmt_double(report.lats[i]) << ',' << fmt_double(report.lons[i]) << ','
        << fmt_double(report.truths[i]) << ',' << fmt_double(report.predictions[i])
        << '\n';
  }
}

}  // namespace gw
