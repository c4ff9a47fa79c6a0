#include "gw/geoindex.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gw/error.hpp"

namespace gw {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr size_t kLeafSize = 16;

double haversine_km(double lat_a, double lon_a, double lat_b, double lon_b) {
  const double phi1 = lat_a * kDegToRad;
  const double phi2 = lat_b * kDegToRad;
  const double dphi = (lat_b - lat_a) * kDegToRad;
  const double dlam = (lon_b - lon_a) * kDegToRad;
  const double sp = std::sin(dphi / 2.0);
  const double sl = std::sin(dlam / 2.0);
  double a = sp * sp + std::cos(phi1) * std::cos(phi2) * sl * sl;
  a = std::clamp(a, 0.0, 1.0);
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(a));
}

double degrees_euclidean(double lat_a, double lon_a, double lat_b, double lon_b) {
  const double dlat = lat_a - lat_b;
  const double dlon = lon_a - lon_b;
  return std::sqrt(dlat * dlat + dlon * dlon);
}

// Smallest angular difference between two longitudes, in radians, in [0, pi].
double lon_angle(double a_deg, double b_deg) {
  double d = std::fabs(a_deg - b_deg);
  while (d > 360.0) d -= 360.0;
  if (d > 180.0) d = 360.0 - d;
  return d * kDegToRad;
}

struct Candidate {
  double rank;  // metric used for ordering
  double km;    // reported great-circle distance
  uint32_t point;
};

}  // namespace

GeoDistance distance_km(double lat_a, double lon_a, double lat_b, double lon_b) {
  return GeoDistance{haversine_km(lat_a, lon_a, lat_b, lon_b)};
}

SpatialIndex SpatialIndex::build(std::vector<IndexPoint> points, Metric metric) {
  if (points.empty()) throw Error("geoindex", "cannot build index from zero points");
  for (const auto& p : points) {
    if (p.lat < -90.0 || p.lat > 90.0 || p.lon < -180.0 || p.lon > 180.0) {
      throw Error("geoindex", "point out of coordinate range: " + p.id);
    }
  }
  SpatialIndex index;
  index.metric_ = metric;
  index.points_ = std::move(points);
  index.nodes_.reserve(2 * index.points_.size() / kLeafSize + 2);
  index.build_node(0, static_cast<uint32_t>(index.points_.size()), 0);
  return index;
}

int32_t SpatialIndex::build_node(uint32_t begin, uint32_t end, int depth) {
  Node node;
  node.begin = begin;
  node.end = end;
  node.lat_min = node.lon_min = 1e30;
  node.lat_max = node.lon_max = -1e30;
  for (uint32_t i = begin; i < end; ++i) {
    node.lat_min = std::min(node.lat_min, points_[i].lat);
    node.lat_max = std::max(node.lat_max, points_[i].lat);
    node.lon_min = std::min(node.lon_min, points_[i].lon);
    node.lon_max = std::max(node.lon_max, points_[i].lon);
  }
  const int32_t self = static_cast<int32_t>(nodes_.size());
  nodes_.push_back(node);

  if (end - begin > kLeafSize) {
    // Split on the wider box extent; median partition keeps the tree balanced.
    const bool by_lat = (node.lat_max - node.lat_min) >= (node.lon_max - node.lon_min);
    (void)depth;
    const uint32_t mid = begin + (end - begin) / 2;
    auto cmp = [by_lat](const IndexPoint& a, const IndexPoint& b) {
      const double ka = by_lat ? a.lat : a.lon;
      const double kb = by_lat ? b.lat : b.lon;
      if (ka != kb) return ka < kb;
      return a.id < b.id;
    };
    std::nth_element(points_.begin() + begin, points_.begin() + mid,
                     points_.begin() + end, cmp);
    const int32_t left = build_node(begin, mid, depth + 1);
    const int32_t right = build_node(mid, end, depth + 1);
    nodes_[self].left = left;
    nodes_[self].right = right;
  }
  return self;
}

// Lower bound on the rank metric from the query to any point inside the
// node's bounding box. Must never exceed the true minimum.
double SpatialIndex::box_lower_bound(const Node& node, double lat, double lon) const {
  if (metric_ == Metric::DegreesEuclidean) {
    const double dlat = lat < node.lat_min   ? node.lat_min - lat
                        : lat > node.lat_max ? lat - node.lat_max
                                             : 0.0;
    const double dlon = lon < node.lon_min   ? node.lon_min - lon
                        : lon > node.lon_max ? lon - node.lon_max
                                             : 0.0;
    return std::sqrt(dlat * dlat + dlon * dlon);
  }

  // Haversine. Latitude gap: any two points whose latitudes differ by d
  // radians are at least R*d apart. Longitude gap: the distance to any
  // point on the meridian of longitude L is at least the cross-track
  // distance to that meridian's great circle, R*asin(cos(lat_q)*sin(dlon));
  // sin(dlon) over the box's longitude interval is minimized at an endpoint
  // unless the interval contains the query's longitude or its antipode.
  double lat_gap = 0.0;
  if (lat < node.lat_min) lat_gap = node.lat_min - lat;
  else if (lat > node.lat_max) lat_gap = lat - node.lat_max;
  const double lat_bound = kEarthRadiusKm * lat_gap * kDegToRad;

  double lon_bound = 0.0;
  if (lon < node.lon_min || lon > node.lon_max) {
    const double anti_a = lon + 180.0;
    const double anti_b = lon - 180.0;
    const bool contains_antipode =
        (anti_a >= node.lon_min && anti_a <= node.lon_max) ||
        (anti_b >= node.lon_min && anti_b <= node.lon_max);
    if (!contains_antipode) {
      const double m = std::min(std::sin(lon_angle(lon, node.lon_min)),
                                std::sin(lon_angle(lon, node.lon_max)));
      const double c = std::clamp(std::cos(lat * kDegToRad) * m, 0.0, 1.0);
      lon_bound = kEarthRadiusKm * std::asin(c);
    }
  }
  return std::max(lat_bound, lon_bound);
}

std::vector<Neighbor> SpatialIndex::knn(double lat, double lon, size_t n) const {
  if (n == 0) throw Error("geoindex", "neighbor count must be at least 1");
  if (n > points_.size()) throw Error("geoindex", "insufficient articles");

  // Max-heap of the best n candidates under (rank, id) lexicographic order.
  std::vector<Candidate> heap;
  heap.reserve(n + 1);
  auto worse = [this](const Candidate& a, const Candidate& b) {
    if (a.rank != b.rank) return a.rank < b.rank;
    return points_[a.point].id < points_[b.point].id;
  };

  auto visit_point = [&](uint32_t i) {
    const auto& p = points_[i];
    const double km = haversine_km(lat, lon, p.lat, p.lon);
    const double rank = metric_ == Metric::HaversineKm
                            ? km
                            : degrees_euclidean(lat, lon, p.lat, p.lon);
    Candidate c{rank, km, i};
    if (heap.size() < n) {
      heap.push_back(c);
      std::push_heap(heap.begin(), heap.end(), worse);
    } else if (worse(c, heap.front())) {
      std::pop_heap(heap.begin(), heap.end(), worse);
      heap.back() = c;
      std::push_heap(heap.begin(), heap.end(), worse);
    }
  };

  // Iterative best-first descent with pruning against the current worst.
  std::vector<int32_t> stack{0};
  while (!stack.empty()) {
    const int32_t ni = stack.back();
    stack.pop_back();
    const Node& node = nodes_[static_cast<size_t>(ni)];
    if (heap.size() == n && box_lower_bound(node, lat, lon) > heap.front().rank) {
      continue;
    }
    if (node.left < 0) {
      for (uint32_t i = node.begin; i < node.end; ++i) visit_point(i);
      continue;
    }
    // Descend the nearer child first so the heap tightens early.
    const double bl = box_lower_bound(nodes_[static_cast<size_t>(node.left)], lat, lon);
    const double br = box_lower_bound(nodes_[static_cast<size_t>(node.right)], lat, lon);
    if (bl <= br) {
      stack.push_back(node.right);
      stack.push_back(node.left);
    } else {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }

  std::sort(heap.begin(), heap.end(), [this](const Candidate& a, const Candidate& b) {
    if (a.rank != b.rank) return a.rank < b.rank;
    return points_[a.point].id < points_[b.point].id;
  });
  std::vector<Neighbor> result;
  result.reserve(heap.size());
  for (const auto& c : heap) {
    result.push_back({points_[c.point].id, GeoDistance{c.km}});
  }
  return result;
}

}  // namespace gw
