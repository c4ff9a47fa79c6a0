#pragma once

#include <string>
#include <vector>

namespace gw {

inline constexpr double kEarthRadiusKm = 6371.0088;

// Great-circle distance in kilometers.
struct GeoDistance {
  double kilometers = 0.0;
};

// Haversine distance between two (lat, lon) degree coordinates.
GeoDistance distance_km(double lat_a, double lon_a, double lat_b, double lon_b);

struct IndexPoint {
  std::string id;
  double lat = 0.0;
  double lon = 0.0;
};

struct Neighbor {
  std::string id;
  GeoDistance distance;  // always great-circle km, whatever the rank metric
};

// Static 2-d tree over (lat, lon). Neighbor queries are exact: results are
// identical to a brute-force scan under the selected metric, ties broken by
// id ascending. Immutable after build; concurrent queries are safe.
class SpatialIndex {
 public:
  // Metric used to *rank* neighbors. The reported distance is great-circle
  // km in both modes.
  enum class Metric { HaversineKm, DegreesEuclidean };

  static SpatialIndex build(std::vector<IndexPoint> points,
                            Metric metric = Metric::HaversineKm);

  size_t size() const { return points_.size(); }
  Metric metric() const { return metric_; }

  // N nearest points to the query, ascending by distance, ties by id.
  // Throws "insufficient articles" when n exceeds the index size.
  std::vector<Neighbor> knn(double lat, double lon, size_t n) const;

 private:
  struct Node {
    double lat_min, lat_max, lon_min, lon_max;
    uint32_t begin, end;   // leaf range into points_
    int32_t left = -1;     // children; -1 for leaves
    int32_t right = -1;
  };

  SpatialIndex() = default;

  int32_t build_node(uint32_t begin, uint32_t end, int depth);
  double box_lower_bound(const Node& node, double lat, double lon) const;

  std::vector<IndexPoint> points_;
  std::vector<Node> nodes_;
  Metric metric_ = Metric::HaversineKm;
};

}  // namespace gw
