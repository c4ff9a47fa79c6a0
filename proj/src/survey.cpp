#include "gw/survey.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "gw/error.hpp"
#include "gw/geoindex.hpp"
#include "gw/pca.hpp"

namespace gw {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

double parse_double(const std::string& s, const char* what) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error("survey", std::string("bad numeric field for ") + what + ": '" + s + "'");
  }
}

bool parse_urban(const std::string& s) {
  if (s == "1" || s == "true") return true;
  if (s == "0" || s == "false") return false;
  throw Error("survey", "bad urban flag: '" + s + "'");
}

struct CsvHeader {
  bool outcome_mode = false;
  size_t asset_columns = 0;
};

CsvHeader read_header(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("survey", "empty survey file");
  auto fields = split_csv_line(line);
  if (fields.size() < 6 || fields[0] != "country" || fields[1] != "cluster_id" ||
      fields[2] != "lat" || fields[3] != "lon" || fields[4] != "urban") {
    throw Error("survey", "bad survey header: '" + line + "'");
  }
  CsvHeader h;
  if (fields.size() == 6 && fields[5] == "outcome") {
    h.outcome_mode = true;
  } else {
    h.asset_columns = fields.size() - 5;
  }
  return h;
}

SurveyPoint parse_point_row(const std::vector<std::string>& f) {
  SurveyPoint p;
  p.country = f[0];
  p.cluster_id = f[1];
  p.lat = parse_double(f[2], "lat");
  p.lon = parse_double(f[3], "lon");
  p.urban = parse_urban(f[4]);
  p.outcome = parse_double(f[5], "outcome");
  if (p.lat < -90.0 || p.lat > 90.0 || p.lon < -180.0 || p.lon > 180.0) {
    throw Error("survey", "coordinate out of range for cluster " + p.cluster_id);
  }
  return p;
}

}  // namespace

AwiResult compute_awi(const AssetMatrix& pooled) {
  const size_t n = pooled.rows.size();
  const size_t k = pooled.columns;
  if (n < 2 || k < 2) throw Error("survey", "asset matrix needs at least 2 rows and 2 columns");
  for (const auto& r : pooled.rows) {
    if (r.size() != k) throw Error("survey", "ragged asset matrix");
    for (double v : r) {
      if (!std::isfinite(v)) throw Error("survey", "missing or non-finite asset cell");
    }
  }

  // Standardize columns; constant columns carry no wealth signal and are dropped.
  std::vector<double> mean(k, 0.0), sd(k, 0.0);
  for (const auto& r : pooled.rows) {
    for (size_t j = 0; j < k; ++j) mean[j] += r[j];
  }
  for (auto& m : mean) m /= static_cast<double>(n);
  for (const auto& r : pooled.rows) {
    for (size_t j = 0; j < k; ++j) {
      const double d = r[j] - mean[j];
      sd[j] += d * d;
    }
  }
  AwiResult result;
  for (size_t j = 0; j < k; ++j) {
    sd[j] = std::sqrt(sd[j] / static_cast<double>(n - 1));
    if (sd[j] > 1e-12 * std::max(1.0, std::fabs(mean[j]))) result.kept_columns.push_back(j);
  }
  if (result.kept_columns.size() < 2) {
    throw Error("survey", "fewer than 2 non-constant asset columns");
  }

  std::vector<std::vector<double>> standardized(n);
  for (size_t i = 0; i < n; ++i) {
    standardized[i].resize(result.kept_columns.size());
    for (size_t j = 0; j < result.kept_columns.size(); ++j) {
      const size_t col = result.kept_columns[j];
      standardized[i][j] = (pooled.rows[i][col] - mean[col]) / sd[col];
    }
  }

  PcaResult pca = pca_fit(standardized, 1);
  std::vector<double> component = pca.components[0];

  // Sign convention: largest-magnitude loading positive.
  size_t arg = 0;
  for (size_t j = 1; j < component.size(); ++j) {
    if (std::fabs(component[j]) > std::fabs(component[arg])) arg = j;
  }
  if (component[arg] < 0.0) {
    for (auto& c : component) c = -c;
  }

  result.scores.resize(n);
  for (size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (size_t j = 0; j < component.size(); ++j) s += standardized[i][j] * component[j];
    result.scores[i] = s;
  }

  const auto [lo_it, hi_it] = std::minmax_element(result.scores.begin(), result.scores.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) throw Error("survey", "degenerate scores: no variance along first component");
  for (auto& s : result.scores) s = -2.0 + 4.0 * (s - lo) / (hi - lo);

  result.component = std::move(component);
  return result;
}

std::vector<SurveyPoint> aggregate_clusters(const std::vector<double>& scores,
                                            const AssetMatrix& meta) {
  if (scores.size() != meta.rows.size()) {
    throw Error("survey", "score count does not match household count");
  }
  std::vector<SurveyPoint> points;
  std::map<std::string, size_t> position;  // cluster id -> index in points
  std::vector<size_t> counts;
  for (size_t i = 0; i < scores.size(); ++i) {
    const std::string& cid = meta.cluster_id[i];
    auto [it, inserted] = position.emplace(cid, points.size());
    if (inserted) {
      SurveyPoint p;
      p.cluster_id = cid;
      p.country = meta.country[i];
      p.lat = meta.cluster_lat[i];
      p.lon = meta.cluster_lon[i];
      p.urban = meta.urban[i];
      p.outcome = 0.0;
      points.push_back(std::move(p));
      counts.push_back(0);
    }
    points[it->second].outcome += scores[i];
    counts[it->second] += 1;
  }
  for (size_t i = 0; i < points.size(); ++i) {
    points[i].outcome /= static_cast<double>(counts[i]);
  }
  return points;
}

SurveyPoint jitter_displace(const SurveyPoint& point, double u, double theta_rad) {
  const double radius_km = (point.urban ? 2.0 : 5.0) * std::sqrt(u);
  SurveyPoint out = point;
  if (radius_km == 0.0) return out;

  // Forward geodesic on the sphere keeps the displacement exactly radius_km.
  const double delta = radius_km / kEarthRadiusKm;
  const double phi1 = point.lat * kDegToRad;
  const double lam1 = point.lon * kDegToRad;
  const double phi2 = std::asin(std::sin(phi1) * std::cos(delta) +
                                std::cos(phi1) * std::sin(delta) * std::cos(theta_rad));
  const double lam2 = lam1 + std::atan2(std::sin(theta_rad) * std::sin(delta) * std::cos(phi1),
                                        std::cos(delta) - std::sin(phi1) * std::sin(phi2));
  out.lat = phi2 * kRadToDeg;
  out.lon = lam2 * kRadToDeg;
  while (out.lon > 180.0) out.lon -= 360.0;
  while (out.lon < -180.0) out.lon += 360.0;
  return out;
}

SurveyPoint apply_jitter(const SurveyPoint& point, Rng& rng) {
  const double u = rng.uniform();
  const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return jitter_displace(point, u, theta);
}

std::vector<SurveyPoint> load_survey_points(std::istream& in) {
  const CsvHeader h = read_header(in);
  if (!h.outcome_mode) throw Error("survey", "expected outcome-mode survey file");
  std::vector<SurveyPoint> points;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != 6) throw Error("survey", "bad survey row: '" + line + "'");
    points.push_back(parse_point_row(f));
  }
  return points;
}

std::vector<SurveyPoint> load_survey_points_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("survey", "cannot open survey file: " + path);
  return load_survey_points(in);
}

EducationLoad load_education(std::istream& in, std::optional<size_t> per_country_cap) {
  const CsvHeader h = read_header(in);
  if (!h.outcome_mode) throw Error("survey", "expected outcome-mode survey file");
  EducationLoad load;
  std::map<std::string, size_t> per_country;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != 6) throw Error("survey", "bad survey row: '" + line + "'");
    SurveyPoint p = parse_point_row(f);
    if (p.outcome < 1.0 || p.outcome > 4.0) {
      ++load.rejected;
      continue;
    }
    if (per_country_cap && per_country[p.country] >= *per_country_cap) continue;
    ++per_country[p.country];
    load.points.push_back(std::move(p));
  }
  return load;
}

EducationLoad load_education_file(const std::string& path,
                                  std::optional<size_t> per_country_cap) {
  std::ifstream in(path);
  if (!in) throw Error("survey", "cannot open survey file: " + path);
  return load_education(in, per_country_cap);
}

AssetMatrix load_asset_matrix(std::istream& in) {
  const CsvHeader h = read_header(in);
  if (h.outcome_mode) throw Error("survey", "expected asset-mode survey file");
  AssetMatrix m;
  m.columns = h.asset_columns;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != 5 + m.columns) throw Error("survey", "bad asset row: '" + line + "'");
    m.country.push_back(f[0]);
    m.cluster_id.push_back(f[1]);
    m.cluster_lat.push_back(parse_double(f[2], "lat"));
    m.cluster_lon.push_back(parse_double(f[3], "lon"));
    m.urban.push_back(parse_urban(f[4]));
    std::vector<double> row(m.columns);
    for (size_t j = 0; j < m.columns; ++j) row[j] = parse_double(f[5 + j], "asset");
    m.rows.push_back(std::move(row));
  }
  return m;
}

void write_survey_csv(std::ostream& out, const std::vector<SurveyPoint>& points) {
  out << "country,cluster_id,lat,lon,urban,outcome\n";
  char buf[160];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%.10g,%.10g,%d,%.10g\n", p.country.c_str(),
                  p.cluster_id.c_str(), p.lat, p.lon, p.urban ? 1 : 0, p.outcome);
    out << buf;
  }
}

}  // namespace gw
