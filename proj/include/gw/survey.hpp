#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gw/rng.hpp"

namespace gw {

// One ground-truth cluster: a coordinate with an outcome value.
struct SurveyPoint {
  std::string cluster_id;
  std::string country;
  double lat = 0.0;
  double lon = 0.0;
  bool urban = false;
  double outcome = 0.0;
};

// Household-level asset responses; rows share the columns of the pooled
// survey. Row metadata ties each household to its cluster.
struct AssetMatrix {
  size_t columns = 0;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> cluster_id;  // per row
  std::vector<std::string> country;     // per row
  std::vector<bool> urban;              // per row
  std::vector<double> cluster_lat;      // per row
  std::vector<double> cluster_lon;      // per row
};

struct AwiResult {
  std::vector<double> scores;       // per household, rescaled into [-2, 2]
  std::vector<double> component;    // loadings over the retained columns
  std::vector<size_t> kept_columns; // indices of non-constant columns
};

// First principal component of the column-standardized pooled asset matrix.
// The component's largest-magnitude loading is made positive, then scores
// are affinely mapped so min = -2 and max = 2.
AwiResult compute_awi(const AssetMatrix& pooled);

// One SurveyPoint per cluster; outcome is the mean of member scores.
// Clusters appear in first-occurrence order.
std::vector<SurveyPoint> aggregate_clusters(const std::vector<double>& scores,
                                            const AssetMatrix& meta);

// Displacement at radius R*sqrt(u) and the given bearing, on the sphere.
// The outcome and metadata are unchanged. R is 2 km urban, 5 km rural.
SurveyPoint jitter_displace(const SurveyPoint& point, double u, double theta_rad);
SurveyPoint apply_jitter(const SurveyPoint& point, Rng& rng);

struct EducationLoad {
  std::vector<SurveyPoint> points;
  size_t rejected = 0;  // outcome outside [1, 4]
};

// Reads the outcome-mode survey CSV, keeping only education levels in
// [1, 4]; at most `per_country_cap` records per country, in file order.
EducationLoad load_education(std::istream& in,
                             std::optional<size_t> per_country_cap = std::nullopt);
EducationLoad load_education_file(const std::string& path,
                                  std::optional<size_t> per_country_cap = std::nullopt);

// Outcome-mode survey CSV: country,cluster_id,lat,lon,urban,outcome.
std::vector<SurveyPoint> load_survey_points(std::istream& in);
std::vector<SurveyPoint> load_survey_points_file(const std::string& path);

// Asset-mode survey CSV: country,cluster_id,lat,lon,urban,asset_1..asset_k.
AssetMatrix load_asset_matrix(std::istream& in);

void write_survey_csv(std::ostream& out, const std::vector<SurveyPoint>& points);

}  // namespace gw
