#include "gw/interpret.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "gw/error.hpp"

namespace gw {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error("interpret", msg); }

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

// Mean embedding of the `n` articles nearest to (lat, lon).
std::vector<double> mean_neighbor_embedding(double lat, double lon,
                                            const SpatialIndex& index,
                                            const EmbeddingModel& model, uint32_t n) {
  const std::vector<Neighbor> near = index.knn(lat, lon, n);
  std::vector<double> acc(model.p, 0.0);
  for (const Neighbor& nb : near) {
    const std::vector<float> emb = embed_doc(model, nb.id);
    for (uint32_t i = 0; i < model.p; ++i) acc[i] += emb[i];
  }
  for (double& v : acc) v /= double(n);
  return acc;
}

}  // namespace

std::vector<SweepEntry> n_sweep(const ExperimentSpec& spec, const DataBundle& bundle,
                                const EvalContext& ctx, const std::vector<uint32_t>& ns) {
  if (ns.empty()) fail("empty sweep list");
  std::vector<SweepEntry> out;
  out.reserve(ns.size());
  for (uint32_t n : ns) {
    ExperimentSpec entry_spec = spec;
    entry_spec.n = n;
    const EvalReport report = run_experiment(entry_spec, bundle, ctx);
    out.push_back({n, report.pearson});
  }
  return out;
}

PcaProjection quantile_embedding_analysis(const std::vector<double>& predictions,
                                          const std::vector<SurveyPoint>& points,
                                          const SpatialIndex& index,
                                          const EmbeddingModel& model,
                                          const std::vector<CategoryArticle>& categories,
                                          uint32_t neighbors) {
  if (predictions.size() != points.size()) fail("predictions do not cover all points");
  if (points.size() < 3) fail("need at least 3 points");
  if (neighbors < 1) fail("neighbor count must be at least 1");

  // Ascending rank; stable order breaks prediction ties deterministically.
  std::vector<size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return predictions[a] < predictions[b]; });

  const size_t third = points.size() / 3;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> vectors;
  for (size_t k = 0; k < third; ++k) {
    const SurveyPoint& p = points[order[k]];
    vectors.push_back(mean_neighbor_embedding(p.lat, p.lon, index, model, neighbors));
    labels.push_back("poor");
  }
  for (size_t k = points.size() - third; k < points.size(); ++k) {
    const SurveyPoint& p = points[order[k]];
    vectors.push_back(mean_neighbor_embedding(p.lat, p.lon, index, model, neighbors));
    labels.push_back("rich");
  }
  for (const CategoryArticle& cat : categories) {
    const std::vector<float> emb = embed_doc(model, cat.doc_id);
    vectors.emplace_back(emb.begin(), emb.end());
    labels.push_back("category:" + cat.category);
  }

  PcaProjection projection;
  projection.pca = pca_fit(vectors, 2);
  projection.points.reserve(vectors.size());
  for (size_t i = 0; i < vectors.size(); ++i) {
    const std::vector<double> xy = projection.pca.project(vectors[i]);
    projection.points.push_back({labels[i], xy[0], xy[1]});
  }
  return projection;
}

std::string derive_category(const std::string& title) {
  static const char* kKeywords[] = {"school", "university", "hospital", "company",
                                    "settlement"};
  std::string lower;
  lower.reserve(title.size());
  for (char c : title)
    lower.push_back(char(std::tolower(static_cast<unsigned char>(c))));
  for (const char* kw : kKeywords)
    if (lower.find(kw) != std::string::npos) return kw;
  return "";
}

void write_sweep_csv(const std::vector<SweepEntry>& sweep, std::ostream& out) {
  out << "N,r2\n";
  for (const SweepEntry& e : sweep)
    out << e.n << ',' << fmt_double(e.r2) << '\n';
}

void write_projection_csv(const PcaProjection& projection, std::ostream& out) {
  out << "label,x,y\n";
  for (const ProjectedPoint& p : projection.points)
    out << p.label << ',' << fmt_double(p.x) << ',' << fmt_double(p.y) << '\n';
}

}  // namespace gw
