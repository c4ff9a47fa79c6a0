#pragma once

#include <cstddef>
#include <vector>

namespace gw {

struct PcaResult {
  size_t dim = 0;
  std::vector<double> mean;                       // column means of the input
  std::vector<std::vector<double>> components;    // k orthonormal directions
  std::vector<double> explained_variance;         // non-increasing eigenvalues

  // Coordinates of x in the component basis (after centering).
  std::vector<double> project(const std::vector<double>& x) const;
};

// Top-k principal components by covariance power iteration with deflation
// (tolerance 1e-10, at most 1e4 iterations per component). Input rows are
// observations. Requires at least k+1 rows; throws on zero total variance.
PcaResult pca_fit(const std::vector<std::vector<double>>& rows, size_t k);

}  // namespace gw
