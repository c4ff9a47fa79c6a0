#include <doctest.h>

#include <cmath>
#include <vector>

#include "gw/error.hpp"
#include "gw/pca.hpp"
#include "gw/rng.hpp"
#include "oracles.hpp"

using namespace gw;

TEST_SUITE("pca") {

TEST_CASE("points on a line have a first component parallel to it") {
  const std::vector<double> direction = {1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0};
  Rng rng(1);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 40; ++i) {
    const double t = rng.uniform(-3.0, 3.0);
    rows.push_back({5.0 + t * direction[0], -2.0 + t * direction[1], t * direction[2]});
  }
  const PcaResult pca = pca_fit(rows, 1);
  REQUIRE(pca.components.size() == 1);
  CHECK(std::fabs(oracle::cosine(pca.components[0], direction)) > 0.999);
}

TEST_CASE("components are orthonormal") {
  Rng rng(9);
  std::vector<std::vector<double>> rows(40, std::vector<double>(5));
  for (auto& r : rows) {
    for (auto& x : r) x = rng.normal();
  }
  const PcaResult pca = pca_fit(rows, 3);
  REQUIRE(pca.components.size() == 3);
  for (size_t i = 0; i < 3; ++i) {
    for (size_t j = 0; j < 3; ++j) {
      const double expected = i == j ? 1.0 : 0.0;
      CHECK(std::fabs(oracle::dot(pca.components[i], pca.components[j]) - expected) <
            1e-8);
    }
  }
}

TEST_CASE("isotropic gaussian gives nearly equal explained variances") {
  Rng rng(123);
  std::vector<std::vector<double>> rows(2000, std::vector<double>(3));
  for (auto& r : rows) {
    for (auto& x : r) x = rng.normal();
  }
  const PcaResult pca = pca_fit(rows, 3);
  REQUIRE(pca.explained_variance.size() == 3);
  CHECK(pca.explained_variance[0] / pca.explained_variance[2] < 1.2);
  // Non-increasing.
  CHECK(pca.explained_variance[0] >= pca.explained_variance[1]);
  CHECK(pca.explained_variance[1] >= pca.explained_variance[2]);
}

TEST_CASE("matches the jacobi eigen oracle") {
  Rng rng(55);
  std::vector<std::vector<double>> rows(60, std::vector<double>(4));
  for (auto& r : rows) {
    const double shared = rng.normal();
    r[0] = 2.0 * shared + 0.3 * rng.normal();
    r[1] = -shared + 0.2 * rng.normal();
    r[2] = rng.normal();
    r[3] = 0.5 * shared + rng.normal();
  }
  const PcaResult pca = pca_fit(rows, 2);
  const oracle::Eigen eigen = oracle::jacobi_eigen(oracle::covariance(rows));
  for (size_t k = 0; k < 2; ++k) {
    CHECK(std::fabs(oracle::cosine(pca.components[k], eigen.vectors[k])) > 0.999);
    CHECK(oracle::rel_err(pca.explained_variance[k], eigen.values[k]) < 1e-6);
  }
}

TEST_CASE("projection centers the input") {
  Rng rng(2);
  std::vector<std::vector<double>> rows(25, std::vector<double>(3));
  for (auto& r : rows) {
    for (auto& x : r) x = rng.uniform(0.0, 10.0);
  }
  const PcaResult pca = pca_fit(rows, 2);
  const std::vector<double> at_mean = pca.project(pca.mean);
  for (double coord : at_mean) CHECK(std::fabs(coord) < 1e-12);

  // project() is a linear map after centering: coordinates recover the
  // component inner products.
  const std::vector<double>& x = rows[3];
  const auto proj = pca.project(x);
  for (size_t k = 0; k < 2; ++k) {
    double expected = 0.0;
    for (size_t j = 0; j < x.size(); ++j) {
      expected += (x[j] - pca.mean[j]) * pca.components[k][j];
    }
    CHECK(proj[k] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("degenerate inputs are errors") {
  // Zero variance.
  CHECK_THROWS_AS(pca_fit({{1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}}, 1), Error);
  // Not enough rows for k.
  CHECK_THROWS_AS(pca_fit({{1.0, 2.0}, {2.0, 1.0}}, 2), Error);
  // Empty.
  CHECK_THROWS_AS(pca_fit({}, 1), Error);
}

}  // TEST_SUITE
