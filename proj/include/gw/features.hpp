#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gw/embed.hpp"
#include "gw/geoindex.hpp"
#include "gw/survey.hpp"

namespace gw {

// Text feature for one survey point: the p-dim embeddings of its N nearest
// articles (nearest first) followed by the N great-circle distances in km.
struct FeatureVector {
  uint32_t n = 0;
  uint32_t p = 0;
  std::vector<float> values;  // length p*n + n

  size_t dim() const { return values.size(); }
  const float* embedding(uint32_t k) const { return &values[size_t(k) * p]; }
  float distance(uint32_t k) const { return values[size_t(p) * n + k]; }
};

struct FeatureOptions {
  // When set, the distance block is divided by the largest distance in the
  // vector (zero stays zero). Default keeps raw kilometers.
  bool normalize_distances = false;
};

FeatureVector build_text_features(const SurveyPoint& point, const SpatialIndex& index,
                                  const EmbeddingModel& model, uint32_t n,
                                  const FeatureOptions& options = {});

// Nightlight radiance grid centered on a survey point.
struct ImageGrid {
  uint32_t height = 0;
  uint32_t width = 0;
  double center_lat = 0.0;
  double center_lon = 0.0;
  std::vector<float> pixels;  // row-major, height*width, all finite and >= 0

  float at(uint32_t r, uint32_t c) const { return pixels[size_t(r) * width + c]; }
};

// Image file: magic "NLIM", u32 version, u32 H, u32 W, f64 center lat/lon,
// H*W float32 row-major. Load errors report the byte offset.
void save_image(const ImageGrid& grid, std::ostream& out);
void save_image_file(const ImageGrid& grid, const std::string& path);
ImageGrid load_image(std::istream& in);
ImageGrid load_image_file(const std::string& path);

// Feature file: one row per survey point, keyed by cluster id, so
// experiments don't recompute embeddings. Magic "GWFT".
struct FeatureFile {
  uint32_t n = 0;
  uint32_t p = 0;
  std::vector<std::string> ids;
  std::vector<FeatureVector> rows;
};

void save_features(const FeatureFile& file, std::ostream& out);
void save_features_file(const FeatureFile& file, const std::string& path);
FeatureFile load_features(std::istream& in);
FeatureFile load_features_file(const std::string& path);

}  // namespace gw
