#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "gw/embed.hpp"
#include "gw/eval.hpp"
#include "gw/geoindex.hpp"
#include "gw/pca.hpp"

namespace gw {

// One sweep entry: neighbor count and the resulting Pearson r^2.
struct SweepEntry {
  uint32_t n = 0;
  double r2 = 0.0;
};

// Re-runs the spec's experiment once per N (shared seeds), reading features
// sliced from a file built with at least max(ns) neighbors.
std::vector<SweepEntry> n_sweep(const ExperimentSpec& spec, const DataBundle& bundle,
                                const EvalContext& ctx, const std::vector<uint32_t>& ns);

struct ProjectedPoint {
  std::string label;  // "rich", "poor", or "category:<name>"
  double x = 0.0;
  double y = 0.0;
};

struct PcaProjection {
  PcaResult pca;  // k=2 fit over the union of projected vectors
  std::vector<ProjectedPoint> points;
};

// A category-tagged article whose embedding joins the projection.
struct CategoryArticle {
  std::string category;
  std::string doc_id;
};

// Ranks `predictions` (ascending); the bottom and top floor(n/3) points are
// the poor/rich clouds. Each selected point contributes the mean embedding
// of its `neighbors` nearest articles. PCA (k=2) is fit on the union of
// cloud vectors and category-article embeddings, and everything is
// projected into that plane.
PcaProjection quantile_embedding_analysis(const std::vector<double>& predictions,
                                          const std::vector<SurveyPoint>& points,
                                          const SpatialIndex& index,
                                          const EmbeddingModel& model,
                                          const std::vector<CategoryArticle>& categories,
                                          uint32_t neighbors = 10);

// Title-keyword fallback for corpora without an explicit category field.
// Returns one of school/university/hospital/company/settlement or "".
std::string derive_category(const std::string& title);

void write_sweep_csv(const std::vector<SweepEntry>& sweep, std::ostream& out);
void write_projection_csv(const PcaProjection& projection, std::ostream& out);

}  // namespace gw
