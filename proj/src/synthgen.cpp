#include "gw/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "gw/error.hpp"
#include "gw/geoindex.hpp"
#include "gw/rng.hpp"

namespace gw {

namespace {

constexpr uint32_t kStatsGrid = 64;

[[noreturn]] void fail(const std::string& msg) { throw Error("synthgen", msg); }

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::vector<std::string> numbered_pool(const std::string& prefix, uint32_t count) {
  std::vector<std::string> pool;
  pool.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%03u", i);
    pool.push_back(prefix + buf);
  }
  return pool;
}

RegionSpec base_region() {
  RegionSpec spec;
  spec.rich_pool = numbered_pool("rich", 40);
  spec.poor_pool = numbered_pool("poor", 40);
  spec.shared_pool = numbered_pool("base", 120);
  return spec;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

void RegionSpec::validate() const {
  if (name.empty()) fail("region name must be non-empty");
  if (!(lat_min < lat_max) || !(lon_min < lon_max)) fail("invalid bounding box");
  if (bumps.empty()) fail("region needs at least one wealth bump");
  if (articles == 0) fail("zero density: article count must be at least 1");
  if (tokens_min < 1 || tokens_max < tokens_min) fail("invalid token count range");
  if (rich_pool.empty() || poor_pool.empty()) fail("rich and poor pools must be non-empty");
  if (!(shared_fraction >= 0.0 && shared_fraction < 1.0))
    fail("shared_fraction must be in [0, 1)");
  if (shared_fraction > 0.0 && shared_pool.empty())
    fail("shared pool empty but shared_fraction > 0");
  if (!(survey_noise >= 0.0)) fail("survey noise must be non-negative");
  if (!(dark_fraction >= 0.0 && dark_fraction <= 1.0))
    fail("dark_fraction must be in [0, 1]");
  if (image_size < 1) fail("image size must be at least 1");
  if (!(image_noise >= 0.0)) fail("image noise must be non-negative");
  std::unordered_set<std::string> seen;
  for (const auto* pool : {&rich_pool, &poor_pool, &shared_pool})
    for (const std::string& w : *pool)
      if (!seen.insert(w).second) fail("token pools must be disjoint: " + w);
}

RegionSpec default_region_a() {
  RegionSpec spec = base_region();
  spec.name = "RegionA";
  spec.lat_min = 0.0;
  spec.lat_max = 1.5;
  spec.lon_min = 30.0;
  spec.lon_max = 31.5;
  spec.bumps = {
      {0.35, 30.35, 1.6, 30.0},
      {1.10, 31.10, 1.1, 24.0},
      {0.95, 30.30, -1.3, 28.0},
      {0.30, 31.15, -0.9, 22.0},
  };
  spec.seed = 101;
  return spec;
}

RegionSpec default_region_b() {
  RegionSpec spec = base_region();
  spec.name = "RegionB";
  spec.lat_min = -1.0;
  spec.lat_max = 0.5;
  spec.lon_min = 33.0;
  spec.lon_max = 34.5;
  spec.bumps = {
      {-0.60, 34.10, 1.4, 26.0},
      {0.15, 33.30, 1.0, 32.0},
      {-0.20, 33.95, -1.2, 25.0},
      {-0.75, 33.25, -0.8, 20.0},
  };
  spec.seed = 202;
  return spec;
}

double field_value(const RegionSpec& spec, double lat, double lon) {
  double acc = 0.0;
  for (const GaussianBump& b : spec.bumps) {
    const double d = distance_km(lat, lon, b.lat, b.lon).kilometers;
    acc += b.amplitude * std::exp(-(d * d) / (2.0 * b.scale_km * b.scale_km));
  }
  return acc;
}

FieldStats field_stats(const RegionSpec& spec) {
  std::vector<double> values;
  values.reserve(size_t(kStatsGrid) * kStatsGrid);
  for (uint32_t r = 0; r < kStatsGrid; ++r) {
    const double lat =
        spec.lat_min + (spec.lat_max - spec.lat_min) * (r + 0.5) / kStatsGrid;
    for (uint32_t c = 0; c < kStatsGrid; ++c) {
      const double lon =
          spec.lon_min + (spec.lon_max - spec.lon_min) * (c + 0.5) / kStatsGrid;
      values.push_back(field_value(spec, lat, lon));
    }
  }
  FieldStats stats;
  double acc = 0.0;
  for (double v : values) acc += v;
  stats.mean = acc / double(values.size());
  double var = 0.0;
  for (double v : values) var += (v - stats.mean) * (v - stats.mean);
  var /= double(values.size() - 1);
  stats.stddev = std::sqrt(var);
  if (!(stats.stddev > 0.0)) fail("degenerate wealth field: zero variance");
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  stats.median = sorted[sorted.size() / 2];
  return stats;
}

double standardized_field(const RegionSpec& spec, const FieldStats& stats,
                          double lat, double lon) {
  return (field_value(spec, lat, lon) - stats.mean) / stats.stddev;
}

double rich_weight(const RegionSpec& spec, const FieldStats& stats,
                   double lat, double lon) {
  return logistic(spec.mixing_exponent * standardized_field(spec, stats, lat, lon));
}

std::vector<GeoArticle> gen_corpus(const RegionSpec& spec) {
  spec.validate();
  const FieldStats stats = field_stats(spec);
  Rng rng(Rng(spec.seed).fork(1).next_u64());

  std::vector<GeoArticle> articles;
  articles.reserve(spec.articles);
  for (uint32_t i = 0; i < spec.articles; ++i) {
    GeoArticle a;
    {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "_a%05u", i);
      a.id = spec.name + buf;
    }
    a.title = a.id;
    a.lat = rng.uniform(spec.lat_min, spec.lat_max);
    a.lon = rng.uniform(spec.lon_min, spec.lon_max);
    const double w_rich = rich_weight(spec, stats, a.lat, a.lon);

    const uint32_t count =
        spec.tokens_min +
        uint32_t(rng.uniform_index(uint64_t(spec.tokens_max - spec.tokens_min) + 1));
    std::string body;
    for (uint32_t t = 0; t < count; ++t) {
      const std::vector<std::string>* pool;
      if (spec.shared_fraction > 0.0 && rng.uniform() < spec.shared_fraction) {
        pool = &spec.shared_pool;
      } else if (rng.uniform() < w_rich) {
        pool = &spec.rich_pool;
      } else {
        pool = &spec.poor_pool;
      }
      if (t > 0) body.push_back(' ');
      body += (*pool)[rng.uniform_index(pool->size())];
    }
    a.body = std::move(body);
    if (w_rich > 0.7) a.category = "company";
    else if (w_rich < 0.3) a.category = "settlement";
    articles.push_back(std::move(a));
  }
  return articles;
}

SurveyTruth gen_surveys(const RegionSpec& spec, uint32_t count) {
  spec.validate();
  if (count < 1) fail("survey count must be at least 1");
  const FieldStats stats = field_stats(spec);
  Rng rng(Rng(spec.seed).fork(2).next_u64());

  SurveyTruth truth;
  truth.points.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    SurveyPoint p;
    {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "_c%04u", i);
      p.cluster_id = spec.name + buf;
    }
    p.country = spec.name;
    const double lat = rng.uniform(spec.lat_min, spec.lat_max);
    const double lon = rng.uniform(spec.lon_min, spec.lon_max);
    const double field = field_value(spec, lat, lon);
    const double std_field = (field - stats.mean) / stats.stddev;
    p.lat = lat;
    p.lon = lon;
    p.urban = field > stats.median;
    p.outcome = std_field;
    if (spec.survey_noise > 0.0) p.outcome += spec.survey_noise * rng.normal();
    p = apply_jitter(p, rng);

    truth.true_lat.push_back(lat);
    truth.true_lon.push_back(lon);
    truth.true_field.push_back(std_field);
    truth.points.push_back(std::move(p));
  }
  return truth;
}

std::vector<ImageGrid> gen_nightlights(const RegionSpec& spec, const SurveyTruth& truth) {
  spec.validate();
  Rng rng(Rng(spec.seed).fork(3).next_u64());

  // Poorest dark_fraction of points (by true field, ties by order) go dark.
  const size_t n = truth.points.size();
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return truth.true_field[a] < truth.true_field[b];
  });
  std::vector<bool> dark(n, false);
  const auto dark_count = size_t(std::floor(spec.dark_fraction * double(n)));
  for (size_t k = 0; k < dark_count; ++k) dark[order[k]] = true;

  std::vector<ImageGrid> images;
  images.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    ImageGrid img;
    img.height = spec.image_size;
    img.width = spec.image_size;
    img.center_lat = truth.points[i].lat;
    img.center_lon = truth.points[i].lon;
    const size_t pixels = size_t(spec.image_size) * spec.image_size;
    if (dark[i]) {
      img.pixels.assign(pixels, 0.0f);
    } else {
      // Monotone radiance map of the field; exact when image_noise == 0.
      const float mean = float(std::exp(truth.true_field[i]));
      img.pixels.resize(pixels);
      for (float& px : img.pixels) {
        double v = mean;
        if (spec.image_noise > 0.0) v += spec.image_noise * rng.normal();
        px = float(std::max(0.0, v));
      }
    }
    images.push_back(std::move(img));
  }
  return images;
}

std::vector<TokenizedDoc> gen_topic_corpus(uint32_t topics, uint32_t docs_per_topic,
                                           uint32_t tokens_per_doc, double shared_fraction,
                                           uint64_t seed) {
  if (topics < 1 || docs_per_topic < 1 || tokens_per_doc < 1)
    fail("topic corpus dimensions must be at least 1");
  if (!(shared_fraction >= 0.0 && shared_fraction < 1.0))
    fail("shared_fraction must be in [0, 1)");
  const std::vector<std::string> shared = numbered_pool("base", 60);
  std::vector<std::vector<std::string>> pools;
  for (uint32_t t = 0; t < topics; ++t) {
    char prefix[16];
    std::snprintf(prefix, sizeof(prefix), "t%u_w", t);
    pools.push_back(numbered_pool(prefix, 40));
  }

  Rng rng(seed);
  std::vector<TokenizedDoc> docs;
  docs.reserve(size_t(topics) * docs_per_topic);
  for (uint32_t t = 0; t < topics; ++t) {
    for (uint32_t d = 0; d < docs_per_topic; ++d) {
      TokenizedDoc doc;
      char buf[32];
      std::snprintf(buf, sizeof(buf), "t%u_d%04u", t, d);
      doc.id = buf;
      doc.tokens.reserve(tokens_per_doc);
      for (uint32_t k = 0; k < tokens_per_doc; ++k) {
        const bool from_shared =
            shared_fraction > 0.0 && rng.uniform() < shared_fraction;
        const std::vector<std::string>& pool = from_shared ? shared : pools[t];
        doc.tokens.push_back(pool[rng.uniform_index(pool.size())]);
      }
      docs.push_back(std::move(doc));
    }
  }
  return docs;
}

void write_corpus(const std::vector<GeoArticle>& articles, std::ostream& out) {
  for (const GeoArticle& a : articles) out << to_corpus_line(a) << '\n';
}

void write_corpus_file(const std::vector<GeoArticle>& articles, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot open for writing: " + path);
  write_corpus(articles, out);
  if (!out) fail("failed writing corpus: " + path);
}

void write_field_grid_csv(const RegionSpec& spec, std::ostream& out) {
  const FieldStats stats = field_stats(spec);
  out << "lat,lon,field,standardized\n";
  for (uint32_t r = 0; r < kStatsGrid; ++r) {
    const double lat =
        spec.lat_min + (spec.lat_max - spec.lat_min) * (r + 0.5) / kStatsGrid;
    for (uint32_t c = 0; c < kStatsGrid; ++c) {
      const double lon =
          spec.lon_min + (spec.lon_max - spec.lon_min) * (c + 0.5) / kStatsGrid;
      const double v = field_value(spec, lat, lon);
      out << fmt_double(lat) << ',' << fmt_double(lon) << ',' << fmt_double(v) << ','
          << fmt_double((v - stats.mean) / stats.stddev) << '\n';
    }
  }
}

}  // namespace gw
