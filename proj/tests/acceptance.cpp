// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Pipeline criteria share a single synthetic dataset (two regions,
// planted wealth signal) built on first use.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gw/cli.hpp"
#include "gw/corpus.hpp"
#include "gw/embed.hpp"
#include "gw/error.hpp"
#include "gw/eval.hpp"
#include "gw/features.hpp"
#include "gw/geoindex.hpp"
#include "gw/interpret.hpp"
#include "gw/nn.hpp"
#include "gw/pca.hpp"
#include "gw/rng.hpp"
#include "gw/survey.hpp"
#include "gw/synthgen.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace gw;

namespace {

struct Criterion {
  bool pass = true;
  std::string detail;

  void expect(bool cond, const std::string& what) {
    if (cond) return;
    pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
  void note(const std::string& s) {
    if (!pass) return;
    if (!detail.empty()) detail += "; ";
    detail += s;
  }
};

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

// ---------------------------------------------------------------- dataset

// Two stock regions at full density, 300 clusters each, sigma 0.1, and 30%
// of the poorest clusters dark. One embedding model covers both corpora;
// features are stored with 15 neighbors so sweeps can slice them down.
struct Dataset {
  std::vector<SurveyPoint> points;
  FeatureFile features;
  std::map<std::string, ImageGrid> images;
  EvalContext ctx;

  DataBundle bundle() const { return {points, &features, &images}; }
};

constexpr uint64_t kRunSeed = 424242;
constexpr uint32_t kEmbedDim = 64;
constexpr uint32_t kStoredNeighbors = 15;

Dataset build_dataset() {
  Dataset d;

  std::vector<GeoArticle> corpus;
  for (RegionSpec region : {default_region_a(), default_region_b()}) {
    region.dark_fraction = 0.3;
    region.image_size = 8;

    std::vector<GeoArticle> articles = gen_corpus(region);
    corpus.insert(corpus.end(), std::make_move_iterator(articles.begin()),
                  std::make_move_iterator(articles.end()));

    const SurveyTruth truth = gen_surveys(region, 300);
    const std::vector<ImageGrid> imgs = gen_nightlights(region, truth);
    for (size_t i = 0; i < truth.points.size(); ++i) {
      d.images.emplace(truth.points[i].cluster_id, imgs[i]);
      d.points.push_back(truth.points[i]);
    }
  }

  EmbedConfig ec;
  ec.p = kEmbedDim;
  ec.epochs = 10;
  ec.train_word_vectors = false;  // doc vectors alone carry the signal
  ec.seed = Rng(kRunSeed).fork(10).next_u64();
  const std::vector<TokenizedDoc> docs = tokenize_corpus(corpus);
  const EmbeddingModel model = train_pvdbow(docs, build_vocab(docs, ec), ec);

  std::vector<IndexPoint> coords;
  coords.reserve(corpus.size());
  for (const GeoArticle& a : corpus) coords.push_back({a.id, a.lat, a.lon});
  const SpatialIndex index = SpatialIndex::build(std::move(coords));

  d.features.n = kStoredNeighbors;
  d.features.p = model.p;
  for (const SurveyPoint& p : d.points) {
    d.features.ids.push_back(p.cluster_id);
    d.features.rows.push_back(build_text_features(p, index, model, kStoredNeighbors));
  }

  d.ctx.train.lr = 1e-3;
  d.ctx.train.epochs = 150;
  d.ctx.train.batch_size = 32;
  d.ctx.train.val_fraction = 0.1;
  d.ctx.train.early_stop_patience = 15;
  d.ctx.shapes.mlp_hidden = {128, 64};
  d.ctx.shapes.mlp_activations = {Activation::Relu, Activation::Sigmoid};
  d.ctx.shapes.cnn.channels = {8, 16};
  d.ctx.shapes.cnn.out_dim = 64;
  d.ctx.shapes.image_head = {64, 32};
  d.ctx.shapes.trunk = {128, 64};
  return d;
}

Dataset& dataset() {
  static Dataset d = build_dataset();
  return d;
}

ExperimentSpec region_a_intra(ModelKind kind, uint32_t n) {
  ExperimentSpec spec;
  spec.regime = Regime::Intra;
  spec.train_countries = {"RegionA"};
  spec.test_countries = {"RegionA"};
  spec.model_kind = kind;
  spec.n = n;
  spec.seed = kRunSeed;
  return spec;
}

std::optional<EvalReport> g_we_report;  // C7's result, reused by C9/C11

// ------------------------------------------------------------- criteria

// 1. Exact k-NN against a brute-force scan: ids and distances identical.
Criterion c1_knn_exactness() {
  Criterion c;
  Rng rng(2024);
  std::vector<IndexPoint> points;
  for (int i = 0; i < 1000; ++i) {
    points.push_back({"p" + std::to_string(i), rng.uniform(-60.0, 60.0),
                      rng.uniform(-179.0, 179.0)});
  }
  const SpatialIndex index = SpatialIndex::build(points);

  size_t checks = 0;
  for (int q = 0; q < 100; ++q) {
    const double lat = rng.uniform(-60.0, 60.0);
    const double lon = rng.uniform(-179.0, 179.0);
    std::vector<std::pair<double, std::string>> brute;
    for (const IndexPoint& p : points)
      brute.push_back({distance_km(lat, lon, p.lat, p.lon).kilometers, p.id});
    std::sort(brute.begin(), brute.end());
    for (size_t n : {size_t(1), size_t(5), size_t(10)}) {
      const std::vector<Neighbor> got = index.knn(lat, lon, n);
      c.expect(got.size() == n, "result size mismatch");
      for (size_t k = 0; k < n; ++k) {
        c.expect(got[k].id == brute[k].second,
                 "id mismatch at query " + std::to_string(q));
        c.expect(got[k].distance.kilometers == brute[k].first,
                 "distance mismatch at query " + std::to_string(q));
        ++checks;
      }
    }
  }
  c.note(std::to_string(checks) + " neighbor comparisons exact");
  return c;
}

// 2. Analytic gradients vs central finite differences (h = 1e-4, rel < 1e-4),
// at least 20 sampled parameters per layer type.
Criterion c2_gradients() {
  Criterion c;
  const double h = 1e-4;
  size_t dense_checked = 0, conv_checked = 0;

  auto check_model = [&](Regressor& model, const Sample& sample, size_t conv_blocks,
                         const std::string& name) {
    model.zero_grad();
    double d_pred = 0.0;
    mse_loss(model.forward_cached(sample), sample.target, &d_pred);
    model.backward(d_pred);

    std::vector<ParamBlock> blocks = model.param_blocks();
    for (size_t bi = 0; bi < blocks.size(); ++bi) {
      std::vector<double>& values = *blocks[bi].values;
      const std::vector<double>& grads = *blocks[bi].grads;
      const size_t stride = std::max<size_t>(1, values.size() / 24);
      for (size_t i = 0; i < values.size(); i += stride) {
        const double saved = values[i];
        values[i] = saved + h;
        double ignore = 0.0;
        const double up = mse_loss(model.forward_cached(sample), sample.target, &ignore);
        values[i] = saved - h;
        const double down =
            mse_loss(model.forward_cached(sample), sample.target, &ignore);
        values[i] = saved;
        const double fd = (up - down) / (2.0 * h);
        const double rel = oracle::rel_err(grads[i], fd);
        c.expect(rel < 1e-4, name + " block " + std::to_string(bi) + " param " +
                                 std::to_string(i) + " rel " + fmt(rel));
        (bi < 2 * conv_blocks ? conv_checked : dense_checked) += 1;
      }
    }
  };

  Rng rng(555);
  auto fill = [&](std::vector<double>& v, size_t n) {
    v.resize(n);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
  };

  {
    MlpConfig mc;
    mc.input_dim = 24;
    mc.hidden = {12, 8};
    mc.activations = {Activation::Relu, Activation::Sigmoid};
    mc.seed = 31;
    MlpRegressor mlp(mc);
    Sample s;
    fill(s.text, 24);
    s.target = 0.7;
    check_model(mlp, s, 0, "mlp");
  }
  {
    MmConfig mc;  // nightlights-only: exercises conv/pool/gap on an 8x8 input
    mc.text_dim = 0;
    mc.cnn.channels = {4, 6};
    mc.cnn.out_dim = 10;
    mc.image_head = {8};
    mc.trunk = {12};
    mc.seed = 32;
    MultiModalRegressor nl(mc);
    Sample s;
    s.image.c = 1;
    s.image.h = 8;
    s.image.w = 8;
    fill(s.image.v, 64);
    s.target = -0.4;
    check_model(nl, s, mc.cnn.channels.size(), "cnn");
  }
  {
    MmConfig mc;  // full multi-modal head: text + image fused
    mc.text_dim = 7;
    mc.cnn.channels = {4, 6};
    mc.cnn.out_dim = 10;
    mc.image_head = {8};
    mc.trunk = {12};
    mc.seed = 33;
    MultiModalRegressor mm(mc);
    Sample s;
    fill(s.text, 7);
    s.image.c = 1;
    s.image.h = 8;
    s.image.w = 8;
    fill(s.image.v, 64);
    s.target = 1.1;
    check_model(mm, s, mc.cnn.channels.size(), "mm");
  }

  c.expect(dense_checked >= 20, "fewer than 20 dense parameters sampled");
  c.expect(conv_checked >= 20, "fewer than 20 conv parameters sampled");
  c.note(std::to_string(dense_checked) + " dense + " + std::to_string(conv_checked) +
         " conv params, rel err < 1e-4");
  return c;
}

// 3. Metric properties: affine invariance to 1e-12, monotone-transform
// invariance, exact 1.0 identities.
Criterion c3_metrics() {
  Criterion c;
  Rng rng(77);
  std::vector<double> truth, pred;
  for (int i = 0; i < 64; ++i) {
    truth.push_back(rng.uniform(-3.0, 3.0));
    pred.push_back(0.8 * truth.back() + 0.5 * rng.normal());
  }

  const double base = pearson_r2(pred, truth);
  for (double a : {3.0, -0.5}) {
    for (double b : {-11.0, 2.5}) {
      std::vector<double> mapped;
      for (double x : pred) mapped.push_back(a * x + b);
      const double diff = std::fabs(pearson_r2(mapped, truth) - base);
      c.expect(diff <= 1e-12, "affine drift " + fmt(diff));
    }
  }

  std::vector<double> monotone;
  for (double x : pred) monotone.push_back(std::exp(x) + 3.0);
  c.expect(spearman_rho2(monotone, pred) == 1.0, "monotone transform not rho2=1");

  c.expect(pearson_r2(truth, truth) == 1.0, "identity pearson not exactly 1");
  c.expect(spearman_rho2(truth, truth) == 1.0, "identity spearman not exactly 1");
  c.note("affine drift <= 1e-12, identities exact");
  return c;
}

// 4. AWI / PCA against the covariance eigensolver oracle; endpoints hit.
Criterion c4_pca_oracle() {
  Criterion c;
  for (uint64_t seed : {100, 200, 300}) {
    Rng rng(seed);
    const size_t rows = 50, cols = 6;
    std::vector<std::vector<double>> m(rows, std::vector<double>(cols));
    std::vector<double> latent(rows);
    for (size_t r = 0; r < rows; ++r) latent[r] = rng.normal();
    for (size_t r = 0; r < rows; ++r)
      for (size_t j = 0; j < cols; ++j)
        m[r][j] = (0.4 + 0.1 * double(j)) * latent[r] + 0.6 * rng.normal();

    // Oracle: first eigenvector of the covariance of standardized columns.
    const auto standardized = oracle::standardize_columns(m);
    const auto eig = oracle::jacobi_eigen(oracle::covariance(standardized));

    AssetMatrix assets;
    assets.columns = cols;
    assets.rows = m;
    assets.cluster_id.assign(rows, "c");
    assets.country.assign(rows, "X");
    assets.urban.assign(rows, false);
    assets.cluster_lat.assign(rows, 0.0);
    assets.cluster_lon.assign(rows, 0.0);
    const AwiResult awi = compute_awi(assets);
    const double awi_cos = std::fabs(oracle::cosine(awi.component, eig.vectors[0]));
    c.expect(awi_cos > 0.999, "awi component cosine " + fmt(awi_cos));

    const double lo = *std::min_element(awi.scores.begin(), awi.scores.end());
    const double hi = *std::max_element(awi.scores.begin(), awi.scores.end());
    c.expect(lo == -2.0 && hi == 2.0,
             "score endpoints [" + fmt(lo) + ", " + fmt(hi) + "]");

    const PcaResult pca = pca_fit(standardized, 1);
    const double pca_cos = std::fabs(oracle::cosine(pca.components[0], eig.vectors[0]));
    c.expect(pca_cos > 0.999, "pca component cosine " + fmt(pca_cos));
  }
  c.note("3 seeded 50x6 matrices, cosines > 0.999, endpoints -2/2 exact");
  return c;
}

// 5. Jitter bounds: hard caps and the rural mean displacement.
Criterion c5_jitter() {
  Criterion c;
  SurveyPoint urban;
  urban.cluster_id = "u";
  urban.lat = 0.3;
  urban.lon = 32.1;
  urban.urban = true;
  SurveyPoint rural = urban;
  rural.cluster_id = "r";
  rural.urban = false;

  Rng rng(31337);
  double urban_max = 0.0, rural_max = 0.0, rural_sum = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const SurveyPoint ju = apply_jitter(urban, rng);
    const SurveyPoint jr = apply_jitter(rural, rng);
    const double du = distance_km(urban.lat, urban.lon, ju.lat, ju.lon).kilometers;
    const double dr = distance_km(rural.lat, rural.lon, jr.lat, jr.lon).kilometers;
    urban_max = std::max(urban_max, du);
    rural_max = std::max(rural_max, dr);
    rural_sum += dr;
  }
  const double rural_mean = rural_sum / draws;
  const double expected = 2.0 / 3.0 * 5.0;
  c.expect(urban_max <= 2.0 * (1.0 + 1e-9), "urban max " + fmt(urban_max) + " km");
  c.expect(rural_max <= 5.0 * (1.0 + 1e-9), "rural max " + fmt(rural_max) + " km");
  c.expect(std::fabs(rural_mean - expected) <= 0.02 * expected,
           "rural mean " + fmt(rural_mean) + " vs " + fmt(expected));
  c.note("urban max " + fmt(urban_max) + ", rural max " + fmt(rural_max) +
         ", rural mean " + fmt(rural_mean));
  return c;
}

// 6. Two-topic embedding separation: intra-topic cosine beats inter-topic
// by >= 0.2 and the training loss decreases.
Criterion c6_embedding_separation() {
  Criterion c;
  const auto docs = gen_topic_corpus(2, 50, 50, 0.3, 99);
  EmbedConfig ec;
  ec.p = 32;
  ec.epochs = 15;
  ec.min_count = 1;
  ec.initial_lr = 0.05f;
  ec.seed = 9;
  const EmbeddingModel model = train_pvdbow(docs, build_vocab(docs, ec), ec);

  std::vector<std::vector<float>> t0, t1;
  for (const TokenizedDoc& doc : docs) {
    (doc.id[1] == '0' ? t0 : t1).push_back(embed_doc(model, doc.id));
  }
  auto mean_cos = [](const std::vector<std::vector<float>>& a,
                     const std::vector<std::vector<float>>& b, bool same) {
    double acc = 0.0;
    size_t count = 0;
    for (size_t i = 0; i < a.size(); ++i) {
      for (size_t j = same ? i + 1 : 0; j < b.size(); ++j) {
        std::vector<double> x(a[i].begin(), a[i].end());
        std::vector<double> y(b[j].begin(), b[j].end());
        acc += oracle::cosine(x, y);
        ++count;
      }
    }
    return acc / double(count);
  };
  const double intra = (mean_cos(t0, t0, true) + mean_cos(t1, t1, true)) / 2.0;
  const double inter = mean_cos(t0, t1, false);
  c.expect(intra - inter >= 0.2,
           "margin " + fmt(intra - inter) + " (intra " + fmt(intra) + ", inter " +
               fmt(inter) + ")");

  const std::vector<double>& loss = per_epoch_loss(model);
  c.expect(!loss.empty() && loss.back() < loss.front(),
           "loss did not decrease (" + fmt(loss.front()) + " -> " +
               (loss.empty() ? "none" : fmt(loss.back())) + ")");
  c.note("margin " + fmt(intra - inter) + ", loss " + fmt(loss.front()) + " -> " +
         fmt(loss.back()));
  return c;
}

// 7. End-to-end WE recovery on RegionA: intra split, N=10, r2 >= 0.8.
Criterion c7_we_recovery() {
  Criterion c;
  const Dataset& d = dataset();
  const EvalReport report =
      run_experiment(region_a_intra(ModelKind::WE, 10), d.bundle(), d.ctx);
  g_we_report = report;
  c.expect(report.pearson >= 0.8, "r2 " + fmt(report.pearson) + " < 0.8");
  c.note("r2 " + fmt(report.pearson) + " on " +
         std::to_string(report.predictions.size()) + " held-out clusters");
  return c;
}

// 8. Transfer analogue: train on RegionA, test on RegionB, r2 >= 0.5.
Criterion c8_transfer() {
  Criterion c;
  const Dataset& d = dataset();
  ExperimentSpec spec;
  spec.regime = Regime::Cross;
  spec.train_countries = {"RegionA"};
  spec.test_countries = {"RegionB"};
  spec.model_kind = ModelKind::WE;
  spec.n = 10;
  spec.seed = kRunSeed;
  const EvalReport report = run_experiment(spec, d.bundle(), d.ctx);
  c.expect(report.pearson >= 0.5, "r2 " + fmt(report.pearson) + " < 0.5");
  c.note("r2 " + fmt(report.pearson) + " across regions");
  return c;
}

// 9. Multi-modal complementarity with 30% dark images: MM >= NL, MM >= WE
// on the identical split.
Criterion c9_multimodal() {
  Criterion c;
  const Dataset& d = dataset();
  if (!g_we_report) {
    const EvalReport we =
        run_experiment(region_a_intra(ModelKind::WE, 10), d.bundle(), d.ctx);
    g_we_report = we;
  }
  const double we = g_we_report->pearson;
  const double nl =
      run_experiment(region_a_intra(ModelKind::NL, 10), d.bundle(), d.ctx).pearson;
  const double mm =
      run_experiment(region_a_intra(ModelKind::MM, 10), d.bundle(), d.ctx).pearson;
  c.expect(mm >= nl, "MM " + fmt(mm) + " < NL " + fmt(nl));
  c.expect(mm >= we, "MM " + fmt(mm) + " < WE " + fmt(we));
  c.note("MM " + fmt(mm) + " vs NL " + fmt(nl) + ", WE " + fmt(we));
  return c;
}

// 10. Determinism: two single-threaded runs of the same configuration give
// byte-identical metric CSVs.
Criterion c10_determinism() {
  Criterion c;
  const fs::path root = fs::temp_directory_path() / "gw_acceptance_determinism";
  fs::remove_all(root);
  auto read_file = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };

  std::vector<std::string> predictions;
  for (const char* run : {"run1", "run2"}) {
    RunConfig cfg = parse_run_config(R"({
      "threads": 1,
      "seed": 11,
      "n": 3,
      "embed": {"p": 8, "epochs": 2, "min_count": 1, "train_word_vectors": false},
      "train": {"epochs": 25, "early_stop_patience": 0},
      "shapes": {"mlp_hidden": [8], "mlp_activations": ["relu"]},
      "synth": {"regions": ["RegionA"], "articles": 150, "surveys": 30,
                "image_size": 4, "tokens_min": 10, "tokens_max": 14}
    })");
    cfg.out_dir = (root / run).string();
    cmd_synth(cfg);
    cmd_embed(cfg);
    cmd_features(cfg);
    cmd_eval(cfg);
    predictions.push_back(read_file(root / run / "predictions_0.csv"));
    c.expect(!predictions.back().empty(), "empty predictions CSV");
  }
  c.expect(predictions[0] == predictions[1], "prediction CSVs differ between runs");
  const std::string corpus1 = read_file(root / "run1" / "corpus.jsonl");
  const std::string corpus2 = read_file(root / "run2" / "corpus.jsonl");
  c.expect(corpus1 == corpus2, "corpora differ between runs");
  c.note("full pipeline rerun byte-identical (" +
         std::to_string(predictions[0].size()) + " bytes compared)");
  return c;
}

// 11. N-sweep: {1,5,10,15} completes; r2 at N=10 within 0.05 of the best.
Criterion c11_n_sweep() {
  Criterion c;
  const Dataset& d = dataset();
  const std::vector<SweepEntry> sweep =
      n_sweep(region_a_intra(ModelKind::WE, 10), d.bundle(), d.ctx, {1, 5, 10, 15});
  c.expect(sweep.size() == 4, "sweep did not complete");
  double best = -1.0, at10 = -1.0;
  std::string curve;
  for (const SweepEntry& e : sweep) {
    best = std::max(best, e.r2);
    if (e.n == 10) at10 = e.r2;
    if (!curve.empty()) curve += ", ";
    curve += "N=" + std::to_string(e.n) + ":" + fmt(e.r2);
  }
  c.expect(at10 >= best - 0.05,
           "r2(10) " + fmt(at10) + " more than 0.05 below best " + fmt(best));
  c.note(curve);
  return c;
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    std::function<Criterion()> fn;
    double budget_seconds;  // 0 = untimed
  };
  const std::vector<Entry> entries = {
      {"k-NN exactness vs brute force", c1_knn_exactness, 5.0},
      {"gradient checks vs finite differences", c2_gradients, 30.0},
      {"correlation metric properties", c3_metrics, 0.0},
      {"AWI/PCA eigensolver oracle", c4_pca_oracle, 0.0},
      {"jitter displacement bounds", c5_jitter, 0.0},
      {"two-topic embedding separation", c6_embedding_separation, 120.0},
      {"end-to-end text-model recovery", c7_we_recovery, 600.0},
      {"cross-region transfer", c8_transfer, 0.0},
      {"multi-modal complementarity", c9_multimodal, 0.0},
      {"single-threaded rerun determinism", c10_determinism, 0.0},
      {"neighbor-count sweep", c11_n_sweep, 0.0},
  };

  int failures = 0;
  for (size_t i = 0; i < entries.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Criterion result;
    try {
      result = entries[i].fn();
    } catch (const std::exception& e) {
      result.pass = false;
      result.detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (entries[i].budget_seconds > 0.0 && seconds > entries[i].budget_seconds) {
      result.pass = false;
      result.detail += (result.detail.empty() ? "" : "; ");
      result.detail += "over budget " + fmt(entries[i].budget_seconds) + "s";
    }
    failures += result.pass ? 0 : 1;
    std::printf("C%-2zu %s  %s (%s) [%.1fs]\n", i + 1, result.pass ? "PASS" : "FAIL",
                entries[i].name, result.detail.c_str(), seconds);
    std::fflush(stdout);
  }
  if (failures > 0) {
    std::printf("%d of %zu criteria failed\n", failures, entries.size());
    return 1;
  }
  std::printf("all %zu criteria passed\n", entries.size());
  return 0;
}
