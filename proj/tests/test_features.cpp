#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "gw/error.hpp"
#include "gw/features.hpp"
#include "gw/rng.hpp"
#include "gw/synthgen.hpp"

using namespace gw;

namespace {

// Hand-assembled model: embeddings are synthetic, deterministic rows.
EmbeddingModel toy_model(const std::vector<std::string>& ids, uint32_t p,
                         uint64_t seed = 4) {
  EmbeddingModel model;
  model.p = p;
  Rng rng(seed);
  for (uint32_t row = 0; row < ids.size(); ++row) {
    model.doc_ids.push_back(ids[row]);
    model.doc_index.emplace(ids[row], row);
    for (uint32_t j = 0; j < p; ++j) model.doc_vectors.push_back(float(rng.uniform(-1.0, 1.0)));
  }
  return model;
}

SurveyPoint point_at(double lat, double lon) {
  SurveyPoint p;
  p.cluster_id = "pt";
  p.country = "X";
  p.lat = lat;
  p.lon = lon;
  return p;
}

}  // namespace

TEST_SUITE("features") {

TEST_CASE("n=1 with the article at the query point gives [embedding, 0]") {
  const EmbeddingModel model = toy_model({"art0"}, 6);
  const SpatialIndex index = SpatialIndex::build({{"art0", 1.5, 30.5}});
  const FeatureVector fv = build_text_features(point_at(1.5, 30.5), index, model, 1);
  REQUIRE(fv.dim() == 7);
  CHECK(fv.n == 1);
  CHECK(fv.p == 6);
  for (uint32_t j = 0; j < 6; ++j) CHECK(fv.values[j] == model.doc_vectors[j]);
  CHECK(fv.distance(0) == 0.0f);
}

TEST_CASE("n=10 with p=300 yields a 3010-long vector") {
  std::vector<std::string> ids;
  std::vector<IndexPoint> points;
  Rng rng(8);
  for (int i = 0; i < 12; ++i) {
    ids.push_back("a" + std::to_string(i));
    points.push_back({ids.back(), rng.uniform(0.0, 1.0), rng.uniform(30.0, 31.0)});
  }
  const EmbeddingModel model = toy_model(ids, 300);
  const SpatialIndex index = SpatialIndex::build(points);
  const FeatureVector fv = build_text_features(point_at(0.5, 30.5), index, model, 10);
  CHECK(fv.dim() == 3010);
  CHECK(fv.n == 10);
  CHECK(fv.p == 300);
}

TEST_CASE("distance block matches recomputed haversine distances, nearest first") {
  std::vector<std::string> ids;
  std::vector<IndexPoint> points;
  Rng rng(15);
  for (int i = 0; i < 20; ++i) {
    ids.push_back("a" + std::to_string(i));
    points.push_back({ids.back(), rng.uniform(0.0, 1.5), rng.uniform(30.0, 31.5)});
  }
  const EmbeddingModel model = toy_model(ids, 4);
  const SpatialIndex index = SpatialIndex::build(points);
  const SurveyPoint query = point_at(0.7, 30.8);
  const FeatureVector fv = build_text_features(query, index, model, 5);

  const auto neighbors = index.knn(query.lat, query.lon, 5);
  for (uint32_t k = 0; k < 5; ++k) {
    CHECK(fv.distance(k) == float(neighbors[k].distance.kilometers));
    if (k > 0) CHECK(fv.distance(k - 1) <= fv.distance(k));
    // The k-th embedding block is the k-th nearest article's vector.
    const uint32_t row = model.doc_index.at(neighbors[k].id);
    for (uint32_t j = 0; j < 4; ++j) {
      CHECK(fv.embedding(k)[j] == model.doc_vectors[size_t(row) * 4 + j]);
    }
  }
}

TEST_CASE("normalized distances divide by the farthest neighbor") {
  std::vector<std::string> ids;
  std::vector<IndexPoint> points;
  Rng rng(25);
  for (int i = 0; i < 8; ++i) {
    ids.push_back("a" + std::to_string(i));
    points.push_back({ids.back(), rng.uniform(0.0, 1.0), rng.uniform(30.0, 31.0)});
  }
  const EmbeddingModel model = toy_model(ids, 3);
  const SpatialIndex index = SpatialIndex::build(points);
  FeatureOptions options;
  options.normalize_distances = true;
  const FeatureVector raw = build_text_features(point_at(0.4, 30.4), index, model, 4);
  const FeatureVector scaled =
      build_text_features(point_at(0.4, 30.4), index, model, 4, options);
  const float far = raw.distance(3);
  REQUIRE(far > 0.0f);
  CHECK(scaled.distance(3) == 1.0f);
  for (uint32_t k = 0; k < 4; ++k) {
    CHECK(scaled.distance(k) == doctest::Approx(raw.distance(k) / far).epsilon(1e-6));
  }
}

TEST_CASE("embedding missing for an indexed article is an error") {
  const EmbeddingModel model = toy_model({"known"}, 3);
  const SpatialIndex index = SpatialIndex::build({{"unknown", 0.0, 0.0}});
  CHECK_THROWS_AS(build_text_features(point_at(0.0, 0.0), index, model, 1), Error);
}

TEST_CASE("all-zero image round-trips as zeros") {
  ImageGrid grid;
  grid.height = 4;
  grid.width = 4;
  grid.center_lat = 0.25;
  grid.center_lon = 30.75;
  grid.pixels.assign(16, 0.0f);
  std::stringstream buffer;
  save_image(grid, buffer);
  const ImageGrid loaded = load_image(buffer);
  CHECK(loaded.height == 4);
  CHECK(loaded.width == 4);
  CHECK(loaded.center_lat == 0.25);
  CHECK(loaded.center_lon == 30.75);
  CHECK(loaded.pixels == std::vector<float>(16, 0.0f));
}

TEST_CASE("synthetic nightlight images round-trip bitwise") {
  RegionSpec spec = default_region_a();
  spec.image_size = 8;
  const SurveyTruth truth = gen_surveys(spec, 5);
  const auto images = gen_nightlights(spec, truth);
  REQUIRE(images.size() == 5);
  for (const ImageGrid& img : images) {
    std::stringstream buffer;
    save_image(img, buffer);
    const ImageGrid loaded = load_image(buffer);
    CHECK(loaded.pixels == img.pixels);
    CHECK(loaded.center_lat == img.center_lat);
    CHECK(loaded.center_lon == img.center_lon);
  }
}

TEST_CASE("a NaN pixel fails with its byte offset") {
  ImageGrid grid;
  grid.height = 2;
  grid.width = 2;
  grid.pixels.assign(4, 1.0f);
  std::stringstream buffer;
  save_image(grid, buffer);
  std::string bytes = buffer.str();
  // Corrupt the third pixel (header: magic 4 + version 4 + dims 8 + center 16).
  const size_t pixel_base = 4 + 4 + 8 + 16;
  const float bad = std::numeric_limits<float>::quiet_NaN();
  bytes.replace(pixel_base + 2 * sizeof(float), sizeof(float),
                reinterpret_cast<const char*>(&bad), sizeof(float));
  std::stringstream corrupted(bytes);
  CHECK_THROWS_WITH_AS(load_image(corrupted), doctest::Contains("byte offset"), Error);
  try {
    std::stringstream again(bytes);
    load_image(again);
  } catch (const Error& e) {
    const std::string expected_offset = std::to_string(pixel_base + 2 * sizeof(float));
    CHECK(std::string(e.what()).find(expected_offset) != std::string::npos);
  }
}

TEST_CASE("negative pixels are rejected on load") {
  ImageGrid grid;
  grid.height = 1;
  grid.width = 2;
  grid.pixels = {0.5f, 0.25f};
  std::stringstream buffer;
  save_image(grid, buffer);
  std::string bytes = buffer.str();
  const float bad = -1.0f;
  bytes.replace(bytes.size() - sizeof(float), sizeof(float),
                reinterpret_cast<const char*>(&bad), sizeof(float));
  std::stringstream corrupted(bytes);
  CHECK_THROWS_AS(load_image(corrupted), Error);
}

TEST_CASE("truncated image files are errors") {
  ImageGrid grid;
  grid.height = 3;
  grid.width = 3;
  grid.pixels.assign(9, 2.0f);
  std::stringstream buffer;
  save_image(grid, buffer);
  const std::string full = buffer.str();
  std::stringstream truncated(full.substr(0, full.size() - 6));
  CHECK_THROWS_AS(load_image(truncated), Error);
  std::stringstream bad_magic("ABCD" + full.substr(4));
  CHECK_THROWS_AS(load_image(bad_magic), Error);
}

TEST_CASE("feature files round-trip") {
  FeatureFile file;
  file.n = 2;
  file.p = 3;
  Rng rng(6);
  for (int i = 0; i < 4; ++i) {
    file.ids.push_back("cluster" + std::to_string(i));
    FeatureVector fv;
    fv.n = 2;
    fv.p = 3;
    for (int j = 0; j < 8; ++j) fv.values.push_back(float(rng.uniform(-2.0, 2.0)));
    file.rows.push_back(std::move(fv));
  }
  std::stringstream buffer;
  save_features(file, buffer);
  const FeatureFile loaded = load_features(buffer);
  CHECK(loaded.n == 2);
  CHECK(loaded.p == 3);
  CHECK(loaded.ids == file.ids);
  REQUIRE(loaded.rows.size() == 4);
  for (size_t i = 0; i < 4; ++i) CHECK(loaded.rows[i].values == file.rows[i].values);
}

TEST_CASE("feature rows with the wrong shape are rejected on save") {
  FeatureFile file;
  file.n = 2;
  file.p = 3;
  file.ids = {"c0"};
  FeatureVector fv;
  fv.n = 2;
  fv.p = 3;
  fv.values.assign(5, 0.0f);  // should be 2*3 + 2 = 8
  file.rows.push_back(fv);
  std::stringstream buffer;
  CHECK_THROWS_AS(save_features(file, buffer), Error);
}

}  // TEST_SUITE
