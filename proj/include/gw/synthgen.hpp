#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gw/corpus.hpp"
#include "gw/features.hpp"
#include "gw/survey.hpp"

namespace gw {

// One Gaussian wealth bump: amplitude * exp(-d_km^2 / (2 scale_km^2)).
struct GaussianBump {
  double lat = 0.0;
  double lon = 0.0;
  double amplitude = 1.0;
  double scale_km = 25.0;
};

// A self-contained synthetic region: a latent wealth field plus everything
// needed to emit a corpus, surveys, and nightlight images whose signal is
// recoverable by construction.
struct RegionSpec {
  std::string name = "Region";
  double lat_min = 0.0, lat_max = 1.0;
  double lon_min = 0.0, lon_max = 1.0;
  std::vector<GaussianBump> bumps;

  uint32_t articles = 2000;           // corpus size ("density")
  uint32_t tokens_min = 40, tokens_max = 60;
  std::vector<std::string> rich_pool, poor_pool, shared_pool;
  double shared_fraction = 0.5;       // chance a token comes from the shared pool
  double mixing_exponent = 2.0;       // logistic steepness on the standardized field

  double survey_noise = 0.1;          // sigma on standardized outcomes
  double dark_fraction = 0.0;         // poorest points given all-zero images
  uint32_t image_size = 32;           // square image side
  double image_noise = 0.05;          // per-pixel radiance noise sigma

  uint64_t seed = 1;

  void validate() const;
};

// The two stock regions share lexicons but have disjoint boxes and
// different bump layouts, giving a cross-transfer analogue.
RegionSpec default_region_a();
RegionSpec default_region_b();

// Mean/stddev/median of the field over a fixed 64x64 grid; used to
// standardize outcomes and set the urban threshold.
struct FieldStats {
  double mean = 0.0;
  double stddev = 1.0;
  double median = 0.0;
};

double field_value(const RegionSpec& spec, double lat, double lon);
FieldStats field_stats(const RegionSpec& spec);
double standardized_field(const RegionSpec& spec, const FieldStats& stats,
                          double lat, double lon);
// Rich-pool weight at a location: logistic(mixing_exponent * standardized field).
double rich_weight(const RegionSpec& spec, const FieldStats& stats,
                   double lat, double lon);

// Articles placed uniformly in the box; tokens drawn from shared/rich/poor
// pools with the rich share set by the local field. `category` is planted:
// "company" where rich weight > 0.7, "settlement" where < 0.3.
std::vector<GeoArticle> gen_corpus(const RegionSpec& spec);

struct SurveyTruth {
  std::vector<SurveyPoint> points;  // jittered coordinates, noisy outcomes
  std::vector<double> true_lat, true_lon;  // pre-jitter cluster locations
  std::vector<double> true_field;          // standardized field at true location
};

SurveyTruth gen_surveys(const RegionSpec& spec, uint32_t count);

// One image per survey point, centered on its (jittered) coordinate; mean
// radiance is exp(standardized field) plus pixel noise, clamped at 0. The
// poorest dark_fraction of points get all-zero images.
std::vector<ImageGrid> gen_nightlights(const RegionSpec& spec, const SurveyTruth& truth);

// Two-topic (or k-topic) corpus for embedding-separation checks: each doc
// draws from its topic's pool plus a shared pool. Doc ids are
// "t<topic>_d<index>".
std::vector<TokenizedDoc> gen_topic_corpus(uint32_t topics, uint32_t docs_per_topic,
                                           uint32_t tokens_per_doc, double shared_fraction,
                                           uint64_t seed);

// Writers. All output is deterministic: fixed ordering, %.10g floats.
void write_corpus(const std::vector<GeoArticle>& articles, std::ostream& out);
void write_corpus_file(const std::vector<GeoArticle>& articles, const std::string& path);
void write_field_grid_csv(const RegionSpec& spec, std::ostream& out);

}  // namespace gw
