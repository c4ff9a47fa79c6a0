#include "gw/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "gw/binio.hpp"
#include "gw/corpus.hpp"
#include "gw/error.hpp"
#include "gw/features.hpp"
#include "gw/geoindex.hpp"
#include "gw/interpret.hpp"
#include "gw/rng.hpp"
#include "gw/survey.hpp"
#include "gw/synthgen.hpp"

namespace gw {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw Error("cli", msg); }

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(std::string("bad config value for '") + key + "': " + e.what());
  }
}

std::vector<Activation> parse_activations(const json& j, const char* key,
                                          std::vector<Activation> fallback) {
  if (!j.contains(key)) return fallback;
  std::vector<Activation> out;
  for (const auto& item : j.at(key)) {
    const std::string s = item.get<std::string>();
    if (s == "linear") out.push_back(Activation::Linear);
    else if (s == "relu") out.push_back(Activation::Relu);
    else if (s == "sigmoid") out.push_back(Activation::Sigmoid);
    else fail("unknown activation: " + s);
  }
  return out;
}

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::Linear: return "linear";
    case Activation::Relu: return "relu";
    case Activation::Sigmoid: return "sigmoid";
  }
  fail("bad activation value");
}

json config_to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["out_dir"] = c.out_dir;
  j["corpus"] = c.corpus;
  j["surveys"] = c.surveys;
  j["images_dir"] = c.images_dir;
  j["model_path"] = c.model_path;
  j["features_path"] = c.features_path;
  j["regressor_path"] = c.regressor_path;
  j["embed"] = {{"p", c.embed.p},
                {"epochs", c.embed.epochs},
                {"window", c.embed.window},
                {"negative_samples", c.embed.negative_samples},
                {"initial_lr", c.embed.initial_lr},
                {"min_count", c.embed.min_count},
                {"subsample_threshold", c.embed.subsample_threshold},
                {"train_word_vectors", c.embed.train_word_vectors}};
  j["n"] = c.n;
  j["train"] = {{"lr", c.train.lr},
                {"epochs", c.train.epochs},
                {"batch_size", c.train.batch_size},
                {"val_fraction", c.train.val_fraction},
                {"early_stop_patience", c.train.early_stop_patience},
                {"freeze_embeddings", c.train.freeze_embeddings}};
  std::vector<std::string> act_names;
  for (Activation a : c.shapes.mlp_activations) act_names.push_back(activation_name(a));
  j["shapes"] = {{"mlp_hidden", c.shapes.mlp_hidden},
                 {"mlp_activations", act_names},
                 {"cnn_channels", c.shapes.cnn.channels},
                 {"cnn_out_dim", c.shapes.cnn.out_dim},
                 {"image_head", c.shapes.image_head},
                 {"trunk", c.shapes.trunk}};
  j["model_kind"] = c.model_kind;
  j["outcome"] = c.outcome;
  json exps = json::array();
  for (const ExperimentSpec& e : c.experiments) {
    exps.push_back({{"regime", to_string(e.regime)},
                    {"train", e.train_countries},
                    {"test", e.test_countries},
                    {"model", to_string(e.model_kind)},
                    {"n", e.n},
                    {"outcome", e.outcome},
                    {"seed", e.seed}});
  }
  j["experiments"] = std::move(exps);
  if (c.grid_countries) {
    j["grid"] = {{"countries", *c.grid_countries}, {"model", c.grid_model}};
  }
  j["synth"] = {{"regions", c.synth.regions},
                {"articles", c.synth.articles},
                {"surveys", c.synth.surveys},
                {"survey_noise", c.synth.survey_noise},
                {"dark_fraction", c.synth.dark_fraction},
                {"image_size", c.synth.image_size},
                {"image_noise", c.synth.image_noise},
                {"tokens_min", c.synth.tokens_min},
                {"tokens_max", c.synth.tokens_max}};
  return j;
}

std::string digest_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open input for digest: " + path);
  uint64_t h = 0xcbf29ce484222325ull;
  char buf[65536];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    h = binio::fnv1a(buf, size_t(in.gcount()), h);
    if (!in) break;
  }
  char hex[20];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

void ensure_out_dir(const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) fail("cannot create output directory: " + cfg.out_dir);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot open for writing: " + path);
  out << text;
  if (!out) fail("failed writing: " + path);
}

void write_manifest(const RunConfig& cfg, const std::string& command,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
  json j;
  j["command"] = command;
  j["version"] = kToolVersion;
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["config"] = config_to_json(cfg);
  json digests = json::object();
  for (const std::string& path : inputs) digests[path] = digest_file(path);
  j["inputs"] = std::move(digests);
  j["outputs"] = outputs;
  write_text_file(cfg.resolve("manifest.json"), j.dump(2) + "\n");
}

ExperimentSpec parse_experiment(const json& j, const RunConfig& cfg) {
  ExperimentSpec spec;
  spec.regime = regime_from_string(get_or<std::string>(j, "regime", "intra"));
  spec.train_countries = get_or<std::vector<std::string>>(j, "train", {});
  spec.test_countries = get_or<std::vector<std::string>>(j, "test", {});
  spec.model_kind = model_kind_from_string(get_or<std::string>(j, "model", "WE"));
  spec.n = get_or<uint32_t>(j, "n", cfg.n);
  spec.outcome = get_or<std::string>(j, "outcome", cfg.outcome);
  spec.seed = get_or<uint64_t>(j, "seed", cfg.seed);
  return spec;
}

RegionSpec stock_region(const std::string& name) {
  if (name == "RegionA") return default_region_a();
  if (name == "RegionB") return default_region_b();
  fail("unknown region (stock regions are RegionA, RegionB): " + name);
}

RegionSpec configured_region(const RunConfig& cfg, const std::string& name,
                             size_t region_index) {
  RegionSpec spec = stock_region(name);
  spec.articles = cfg.synth.articles;
  spec.survey_noise = cfg.synth.survey_noise;
  spec.dark_fraction = cfg.synth.dark_fraction;
  spec.image_size = cfg.synth.image_size;
  spec.image_noise = cfg.synth.image_noise;
  spec.tokens_min = cfg.synth.tokens_min;
  spec.tokens_max = cfg.synth.tokens_max;
  // The global seed drives every stage; stock seeds only separate regions.
  spec.seed = Rng(cfg.seed).fork(1000 + region_index).next_u64() ^ spec.seed;
  return spec;
}

std::string image_path(const RunConfig& cfg, const std::string& cluster_id) {
  return cfg.resolve(cfg.images_dir) + "/img_" + cluster_id + ".nlim";
}

// Loads one image per survey point for NL/MM experiments.
std::map<std::string, ImageGrid> load_images(const RunConfig& cfg,
                                             const std::vector<SurveyPoint>& points) {
  std::map<std::string, ImageGrid> images;
  for (const SurveyPoint& p : points) {
    if (images.count(p.cluster_id)) continue;
    const std::string path = image_path(cfg, p.cluster_id);
    if (!fs::exists(path)) fail("missing images: " + path);
    images.emplace(p.cluster_id, load_image_file(path));
  }
  return images;
}

bool any_needs_images(const std::vector<ExperimentSpec>& specs) {
  for (const ExperimentSpec& s : specs)
    if (s.model_kind != ModelKind::WE) return true;
  return false;
}

bool any_needs_text(const std::vector<ExperimentSpec>& specs) {
  for (const ExperimentSpec& s : specs)
    if (s.model_kind != ModelKind::NL) return true;
  return false;
}

std::vector<ExperimentSpec> effective_experiments(const RunConfig& cfg,
                                                  const std::vector<SurveyPoint>& points) {
  if (!cfg.experiments.empty()) return cfg.experiments;
  if (points.empty()) fail("no survey points");
  ExperimentSpec spec;
  spec.regime = Regime::Intra;
  spec.train_countries = {points.front().country};
  spec.test_countries = {points.front().country};
  spec.model_kind = model_kind_from_string(cfg.model_kind);
  spec.n = cfg.n;
  spec.outcome = cfg.outcome;
  spec.seed = cfg.seed;
  return {spec};
}

EvalContext make_context(const RunConfig& cfg) {
  EvalContext ctx;
  ctx.train = cfg.train;
  ctx.shapes = cfg.shapes;
  return ctx;
}

}  // namespace

std::string RunConfig::resolve(const std::string& path) const {
  if (path.empty()) fail("empty path in config");
  if (fs::path(path).is_absolute()) return path;
  return (fs::path(out_dir) / path).string();
}

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(std::string("invalid config JSON: ") + e.what());
  }
  RunConfig c;
  c.seed = get_or<uint64_t>(j, "seed", c.seed);
  c.threads = get_or<uint32_t>(j, "threads", c.threads);
  c.out_dir = get_or<std::string>(j, "out_dir", c.out_dir);
  c.corpus = get_or<std::string>(j, "corpus", c.corpus);
  c.surveys = get_or<std::string>(j, "surveys", c.surveys);
  c.images_dir = get_or<std::string>(j, "images_dir", c.images_dir);
  c.model_path = get_or<std::string>(j, "model_path", c.model_path);
  c.features_path = get_or<std::string>(j, "features_path", c.features_path);
  c.regressor_path = get_or<std::string>(j, "regressor_path", c.regressor_path);
  if (j.contains("embed")) {
    const json& e = j.at("embed");
    c.embed.p = get_or<uint32_t>(e, "p", c.embed.p);
    c.embed.epochs = get_or<uint32_t>(e, "epochs", c.embed.epochs);
    c.embed.window = get_or<uint32_t>(e, "window", c.embed.window);
    c.embed.negative_samples = get_or<uint32_t>(e, "negative_samples", c.embed.negative_samples);
    c.embed.initial_lr = get_or<float>(e, "initial_lr", c.embed.initial_lr);
    c.embed.min_count = get_or<uint32_t>(e, "min_count", c.embed.min_count);
    c.embed.subsample_threshold =
        get_or<double>(e, "subsample_threshold", c.embed.subsample_threshold);
    c.embed.train_word_vectors =
        get_or<bool>(e, "train_word_vectors", c.embed.train_word_vectors);
  }
  c.n = get_or<uint32_t>(j, "n", c.n);
  if (j.contains("train")) {
    const json& t = j.at("train");
    c.train.lr = get_or<double>(t, "lr", c.train.lr);
    c.train.epochs = get_or<uint32_t>(t, "epochs", c.train.epochs);
    c.train.batch_size = get_or<uint32_t>(t, "batch_size", c.train.batch_size);
    c.train.val_fraction = get_or<double>(t, "val_fraction", c.train.val_fraction);
    c.train.early_stop_patience =
        get_or<uint32_t>(t, "early_stop_patience", c.train.early_stop_patience);
    c.train.freeze_embeddings =
        get_or<bool>(t, "freeze_embeddings", c.train.freeze_embeddings);
  }
  if (j.contains("shapes")) {
    const json& s = j.at("shapes");
    c.shapes.mlp_hidden = get_or<std::vector<uint32_t>>(s, "mlp_hidden", c.shapes.mlp_hidden);
    c.shapes.mlp_activations =
        parse_activations(s, "mlp_activations", c.shapes.mlp_activations);
    c.shapes.cnn.channels =
        get_or<std::vector<uint32_t>>(s, "cnn_channels", c.shapes.cnn.channels);
    c.shapes.cnn.out_dim = get_or<uint32_t>(s, "cnn_out_dim", c.shapes.cnn.out_dim);
    c.shapes.image_head = get_or<std::vector<uint32_t>>(s, "image_head", c.shapes.image_head);
    c.shapes.trunk = get_or<std::vector<uint32_t>>(s, "trunk", c.shapes.trunk);
  }
  c.model_kind = get_or<std::string>(j, "model_kind", c.model_kind);
  c.outcome = get_or<std::string>(j, "outcome", c.outcome);
  if (j.contains("experiments")) {
    for (const json& e : j.at("experiments")) c.experiments.push_back(parse_experiment(e, c));
  }
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    c.grid_countries = get_or<std::vector<std::string>>(g, "countries", {});
    c.grid_model = get_or<std::string>(g, "model", c.grid_model);
    if (c.grid_countries->size() < 2) fail("grid needs at least 2 countries");
  }
  if (j.contains("synth")) {
    const json& s = j.at("synth");
    c.synth.regions = get_or<std::vector<std::string>>(s, "regions", c.synth.regions);
    c.synth.articles = get_or<uint32_t>(s, "articles", c.synth.articles);
    c.synth.surveys = get_or<uint32_t>(s, "surveys", c.synth.surveys);
    c.synth.survey_noise = get_or<double>(s, "survey_noise", c.synth.survey_noise);
    c.synth.dark_fraction = get_or<double>(s, "dark_fraction", c.synth.dark_fraction);
    c.synth.image_size = get_or<uint32_t>(s, "image_size", c.synth.image_size);
    c.synth.image_noise = get_or<double>(s, "image_noise", c.synth.image_noise);
    c.synth.tokens_min = get_or<uint32_t>(s, "tokens_min", c.synth.tokens_min);
    c.synth.tokens_max = get_or<uint32_t>(s, "tokens_max", c.synth.tokens_max);
  }
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

void cmd_synth(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  if (cfg.synth.regions.empty()) fail("no regions configured");

  std::vector<GeoArticle> all_articles;
  std::vector<SurveyPoint> all_points;
  std::vector<std::string> outputs;

  const std::string images_dir = cfg.resolve(cfg.images_dir);
  std::error_code ec;
  fs::create_directories(images_dir, ec);
  if (ec) fail("cannot create images directory: " + images_dir);

  for (size_t ri = 0; ri < cfg.synth.regions.size(); ++ri) {
    const RegionSpec spec = configured_region(cfg, cfg.synth.regions[ri], ri);
    std::vector<GeoArticle> articles = gen_corpus(spec);
    all_articles.insert(all_articles.end(), std::make_move_iterator(articles.begin()),
                        std::make_move_iterator(articles.end()));
    const SurveyTruth truth = gen_surveys(spec, cfg.synth.surveys);
    const std::vector<ImageGrid> images = gen_nightlights(spec, truth);
    for (size_t i = 0; i < images.size(); ++i) {
      const std::string path = image_path(cfg, truth.points[i].cluster_id);
      save_image_file(images[i], path);
    }
    all_points.insert(all_points.end(), truth.points.begin(), truth.points.end());

    const std::string field_name = "field_" + spec.name + ".csv";
    std::ofstream field_out(cfg.resolve(field_name), std::ios::binary);
    if (!field_out) fail("cannot open for writing: " + cfg.resolve(field_name));
    write_field_grid_csv(spec, field_out);
    outputs.push_back(field_name);
  }

  write_corpus_file(all_articles, cfg.resolve(cfg.corpus));
  outputs.insert(outputs.begin(), cfg.corpus);
  {
    std::ofstream out(cfg.resolve(cfg.surveys), std::ios::binary);
    if (!out) fail("cannot open for writing: " + cfg.resolve(cfg.surveys));
    write_survey_csv(out, all_points);
  }
  outputs.insert(outputs.begin() + 1, cfg.surveys);
  outputs.push_back(cfg.images_dir + "/");
  write_manifest(cfg, "synth", {}, outputs);
}

void cmd_embed(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  const std::string corpus_path = cfg.resolve(cfg.corpus);
  const ParseResult parsed = parse_corpus_file(corpus_path);
  if (parsed.articles.empty()) fail("corpus is empty: " + corpus_path);
  const std::vector<TokenizedDoc> docs = tokenize_corpus(parsed.articles);

  EmbedConfig embed_cfg = cfg.embed;
  embed_cfg.workers = cfg.threads;
  embed_cfg.seed = Rng(cfg.seed).fork(10).next_u64();
  const Vocabulary vocab = build_vocab(docs, embed_cfg);
  const EmbeddingModel model = train_pvdbow(docs, vocab, embed_cfg);
  save_model_file(model, cfg.resolve(cfg.model_path));
  write_manifest(cfg, "embed", {corpus_path}, {cfg.model_path});
}

void cmd_features(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  const std::string corpus_path = cfg.resolve(cfg.corpus);
  const std::string model_path = cfg.resolve(cfg.model_path);
  const std::string surveys_path = cfg.resolve(cfg.surveys);

  const ParseResult parsed = parse_corpus_file(corpus_path);
  const EmbeddingModel model = load_model_file(model_path);
  const std::vector<SurveyPoint> points = load_survey_points_file(surveys_path);
  if (points.empty()) fail("no survey points in " + surveys_path);

  std::vector<IndexPoint> coords;
  coords.reserve(parsed.articles.size());
  for (const GeoArticle& a : parsed.articles) coords.push_back({a.id, a.lat, a.lon});
  const SpatialIndex index = SpatialIndex::build(std::move(coords));

  FeatureFile file;
  file.n = cfg.n;
  file.p = model.p;
  for (const SurveyPoint& p : points) {
    file.ids.push_back(p.cluster_id);
    file.rows.push_back(build_text_features(p, index, model, cfg.n));
  }
  save_features_file(file, cfg.resolve(cfg.features_path));
  write_manifest(cfg, "features", {corpus_path, model_path, surveys_path},
                 {cfg.features_path});
}

void cmd_train(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  const std::string surveys_path = cfg.resolve(cfg.surveys);
  const std::vector<SurveyPoint> points = load_survey_points_file(surveys_path);
  if (points.empty()) fail("no survey points in " + surveys_path);

  const ModelKind kind = model_kind_from_string(cfg.model_kind);
  std::vector<std::string> inputs = {surveys_path};

  FeatureFile features;
  std::unordered_map<std::string, const FeatureVector*> by_id;
  if (kind != ModelKind::NL) {
    const std::string features_path = cfg.resolve(cfg.features_path);
    features = load_features_file(features_path);
    inputs.push_back(features_path);
    for (size_t i = 0; i < features.ids.size(); ++i)
      by_id.emplace(features.ids[i], &features.rows[i]);
  }
  std::map<std::string, ImageGrid> images;
  if (kind != ModelKind::WE) images = load_images(cfg, points);

  std::vector<Sample> samples;
  for (const SurveyPoint& p : points) {
    Sample s;
    if (kind != ModelKind::NL) {
      auto it = by_id.find(p.cluster_id);
      if (it == by_id.end()) fail("no features for cluster: " + p.cluster_id);
      s.text = feature_slice(*it->second, cfg.n);
    }
    if (kind != ModelKind::WE) {
      const ImageGrid& img = images.at(p.cluster_id);
      s.image.c = 1;
      s.image.h = img.height;
      s.image.w = img.width;
      s.image.v.assign(img.pixels.begin(), img.pixels.end());
    }
    s.target = p.outcome;
    samples.push_back(std::move(s));
  }

  std::unique_ptr<Regressor> model;
  const uint64_t model_seed = Rng(cfg.seed).fork(7).next_u64();
  if (kind == ModelKind::WE) {
    MlpConfig mc;
    mc.input_dim = uint32_t(samples.front().text.size());
    mc.hidden = cfg.shapes.mlp_hidden;
    mc.activations = cfg.shapes.mlp_activations;
    mc.seed = model_seed;
    model = std::make_unique<MlpRegressor>(mc);
  } else {
    MmConfig mc;
    mc.text_dim = kind == ModelKind::NL ? 0 : uint32_t(samples.front().text.size());
    mc.cnn = cfg.shapes.cnn;
    mc.image_head = cfg.shapes.image_head;
    mc.trunk = cfg.shapes.trunk;
    mc.seed = model_seed;
    model = std::make_unique<MultiModalRegressor>(mc);
  }
  TrainConfig tc = cfg.train;
  tc.seed = Rng(cfg.seed).fork(11).next_u64();
  train(*model, samples, tc);
  save_regressor_file(*model, cfg.resolve(cfg.regressor_path));
  write_manifest(cfg, "train", inputs, {cfg.regressor_path});
}

namespace {

// Shared assembly for eval/sweep/pca: surveys + features (+ images when any
// experiment needs them).
struct LoadedBundle {
  std::vector<SurveyPoint> points;
  FeatureFile features;
  std::map<std::string, ImageGrid> images;
  DataBundle bundle;
  std::vector<std::string> inputs;
  std::vector<ExperimentSpec> specs;
};

LoadedBundle load_bundle(const RunConfig& cfg) {
  LoadedBundle lb;
  const std::string surveys_path = cfg.resolve(cfg.surveys);
  lb.points = load_survey_points_file(surveys_path);
  lb.inputs.push_back(surveys_path);
  lb.specs = effective_experiments(cfg, lb.points);
  lb.bundle.points = lb.points;
  if (any_needs_text(lb.specs)) {
    const std::string features_path = cfg.resolve(cfg.features_path);
    lb.features = load_features_file(features_path);
    lb.inputs.push_back(features_path);
    lb.bundle.features = &lb.features;
  }
  if (any_needs_images(lb.specs)) {
    lb.images = load_images(cfg, lb.points);
    lb.bundle.images = &lb.images;
  }
  return lb;
}

}  // namespace

void cmd_eval(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  LoadedBundle lb = load_bundle(cfg);
  const EvalContext ctx = make_context(cfg);
  std::vector<std::string> outputs;

  for (size_t i = 0; i < lb.specs.size(); ++i) {
    const EvalReport report = run_experiment(lb.specs[i], lb.bundle, ctx);
    const std::string report_name = "report_" + std::to_string(i) + ".json";
    const std::string pred_name = "predictions_" + std::to_string(i) + ".csv";
    {
      std::ofstream out(cfg.resolve(report_name), std::ios::binary);
      if (!out) fail("cannot open for writing: " + cfg.resolve(report_name));
      write_report_json(report, out);
    }
    {
      std::ofstream out(cfg.resolve(pred_name), std::ios::binary);
      if (!out) fail("cannot open for writing: " + cfg.resolve(pred_name));
      write_predictions_csv(report, out);
    }
    outputs.push_back(report_name);
    outputs.push_back(pred_name);
  }

  if (cfg.grid_countries) {
    // The grid may include NL/MM columns even when listed experiments are
    // text-only, so make sure images are present if its model needs them.
    const ModelKind kind = model_kind_from_string(cfg.grid_model);
    if (kind != ModelKind::WE && !lb.bundle.images) {
      lb.images = load_images(cfg, lb.points);
      lb.bundle.images = &lb.images;
    }
    if (kind != ModelKind::NL && !lb.bundle.features) {
      const std::string features_path = cfg.resolve(cfg.features_path);
      lb.features = load_features_file(features_path);
      lb.inputs.push_back(features_path);
      lb.bundle.features = &lb.features;
    }
    const GridResult grid = run_grid(*cfg.grid_countries, kind, cfg.n, cfg.seed,
                                     cfg.outcome, lb.bundle, ctx);
    const std::string matrix_name = "matrix_" + cfg.grid_model + ".csv";
    std::ofstream out(cfg.resolve(matrix_name), std::ios::binary);
    if (!out) fail("cannot open for writing: " + cfg.resolve(matrix_name));
    write_matrix_csv(grid, out);
    outputs.push_back(matrix_name);
  }
  write_manifest(cfg, "eval", lb.inputs, outputs);
}

void cmd_sweep(const RunConfig& cfg, const std::vector<uint32_t>& ns) {
  ensure_out_dir(cfg);
  if (ns.empty()) fail("empty sweep list");
  LoadedBundle lb = load_bundle(cfg);
  const EvalContext ctx = make_context(cfg);
  const std::vector<SweepEntry> sweep = n_sweep(lb.specs.front(), lb.bundle, ctx, ns);
  const std::string name = "sweep.csv";
  std::ofstream out(cfg.resolve(name), std::ios::binary);
  if (!out) fail("cannot open for writing: " + cfg.resolve(name));
  write_sweep_csv(sweep, out);
  write_manifest(cfg, "sweep", lb.inputs, {name});
}

void cmd_pca(const RunConfig& cfg, const std::vector<std::string>& categories) {
  ensure_out_dir(cfg);
  const std::string corpus_path = cfg.resolve(cfg.corpus);
  const std::string model_path = cfg.resolve(cfg.model_path);

  LoadedBundle lb = load_bundle(cfg);
  lb.inputs.push_back(corpus_path);
  lb.inputs.push_back(model_path);
  const EvalContext ctx = make_context(cfg);
  const EvalReport report = run_experiment(lb.specs.front(), lb.bundle, ctx);

  const ParseResult parsed = parse_corpus_file(corpus_path);
  const EmbeddingModel model = load_model_file(model_path);
  std::vector<IndexPoint> coords;
  for (const GeoArticle& a : parsed.articles) coords.push_back({a.id, a.lat, a.lon});
  const SpatialIndex index = SpatialIndex::build(std::move(coords));

  std::vector<CategoryArticle> cats;
  for (const GeoArticle& a : parsed.articles) {
    std::string cat = a.category.empty() ? derive_category(a.title) : a.category;
    if (cat.empty()) continue;
    if (!categories.empty() &&
        std::find(categories.begin(), categories.end(), cat) == categories.end())
      continue;
    cats.push_back({std::move(cat), a.id});
  }

  std::vector<SurveyPoint> test_points(report.truths.size());
  for (size_t i = 0; i < test_points.size(); ++i) {
    test_points[i].lat = report.lats[i];
    test_points[i].lon = report.lons[i];
  }
  const PcaProjection projection = quantile_embedding_analysis(
      report.predictions, test_points, index, model, cats);
  const std::string name = "projection.csv";
  std::ofstream out(cfg.resolve(name), std::ios::binary);
  if (!out) fail("cannot open for writing: " + cfg.resolve(name));
  write_projection_csv(projection, out);
  write_manifest(cfg, "pca", lb.inputs, {name});
}

}  // namespace gw
