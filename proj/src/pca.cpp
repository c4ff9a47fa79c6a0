#include "gw/pca.hpp"

#include <cmath>

#include "gw/error.hpp"

namespace gw {
namespace {

constexpr double kTolerance = 1e-10;
constexpr int kMaxIterations = 10000;

// Deterministic start vector; a tiny LCG avoids pathological alignment with
// data axes without pulling in an external seed.
std::vector<double> start_vector(size_t dim, size_t component) {
  std::vector<double> v(dim);
  uint64_t state = 0x853c49e6748fea9bull + component;
  for (auto& x : v) {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    x = static_cast<double>(state >> 11) * 0x1.0p-53 - 0.5;
  }
  return v;
}

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void orthogonalize(std::vector<double>& v,
                   const std::vector<std::vector<double>>& basis) {
  for (const auto& b : basis) {
    double d = 0.0;
    for (size_t i = 0; i < v.size(); ++i) d += v[i] * b[i];
    for (size_t i = 0; i < v.size(); ++i) v[i] -= d * b[i];
  }
}

}  // namespace

std::vector<double> PcaResult::project(const std::vector<double>& x) const {
  std::vector<double> out(components.size(), 0.0);
  for (size_t c = 0; c < components.size(); ++c) {
    double d = 0.0;
    for (size_t i = 0; i < dim; ++i) d += (x[i] - mean[i]) * components[c][i];
    out[c] = d;
  }
  return out;
}

PcaResult pca_fit(const std::vector<std::vector<double>>& rows, size_t k) {
  if (k == 0) throw Error("pca", "component count must be at least 1");
  if (rows.size() < k + 1) throw Error("pca", "need at least k+1 observations");
  const size_t dim = rows[0].size();
  for (const auto& r : rows) {
    if (r.size() != dim) throw Error("pca", "inconsistent row dimensions");
  }

  PcaResult result;
  result.dim = dim;
  result.mean.assign(dim, 0.0);
  for (const auto& r : rows) {
    for (size_t i = 0; i < dim; ++i) result.mean[i] += r[i];
  }
  for (auto& m : result.mean) m /= static_cast<double>(rows.size());

  // Sample covariance, deflated in place as components are extracted.
  std::vector<double> cov(dim * dim, 0.0);
  for (const auto& r : rows) {
    for (size_t i = 0; i < dim; ++i) {
      const double di = r[i] - result.mean[i];
      for (size_t j = i; j < dim; ++j) {
        cov[i * dim + j] += di * (r[j] - result.mean[j]);
      }
    }
  }
  const double denom = static_cast<double>(rows.size() - 1);
  double trace = 0.0;
  for (size_t i = 0; i < dim; ++i) {
    for (size_t j = i; j < dim; ++j) {
      cov[i * dim + j] /= denom;
      cov[j * dim + i] = cov[i * dim + j];
    }
    trace += cov[i * dim + i];
  }
  if (!(trace > 0.0)) throw Error("pca", "degenerate input: zero variance");

  std::vector<double> next(dim);
  for (size_t c = 0; c < k; ++c) {
    std::vector<double> v = start_vector(dim, c);
    orthogonalize(v, result.components);
    double n = norm(v);
    for (auto& x : v) x /= n;

    for (int iter = 0; iter < kMaxIterations; ++iter) {
      for (size_t i = 0; i < dim; ++i) {
        double s = 0.0;
        const double* row = &cov[i * dim];
        for (size_t j = 0; j < dim; ++j) s += row[j] * v[j];
        next[i] = s;
      }
      orthogonalize(next, result.components);
      n = norm(next);
      if (n == 0.0) break;  // exactly in the nullspace; keep current v
      for (auto& x : next) x /= n;
      double delta = 0.0;
      for (size_t i = 0; i < dim; ++i) delta = std::max(delta, std::fabs(next[i] - v[i]));
      v.swap(next);
      if (delta < kTolerance) break;
    }

    // Rayleigh quotient on the deflated matrix.
    double lambda = 0.0;
    for (size_t i = 0; i < dim; ++i) {
      double s = 0.0;
      for (size_t j = 0; j < dim; ++j) s += cov[i * dim + j] * v[j];
      lambda += v[i] * s;
    }
    lambda = std::max(lambda, 0.0);

    for (size_t i = 0; i < dim; ++i) {
      for (size_t j = 0; j < dim; ++j) {
        cov[i * dim + j] -= lambda * v[i] * v[j];
      }
    }
    result.components.push_back(std::move(v));
    result.explained_variance.push_back(lambda);
  }
  return result;
}

}  // namespace gw
