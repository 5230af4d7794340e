/*
 *  Copyright (C) 2026 The ctrack Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 *  See the file LICENSE for more information.
 */

#include <cmath>
#include <random>

#include "ctrack/graph.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace ctrack;

namespace {

CommGraph cycle4(double last_weight = 1.0) {
  return CommGraph::from_edges(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {3, 0, last_weight}});
}

void check_spectrum(const CommGraph& g, std::initializer_list<double> expected) {
  const Vector& ev = g.spectrum().eigenvalues;
  std::size_t i = 0;
  for (double e : expected) CHECK(std::abs(ev[i++] - e) < 1e-10);
}

}  // namespace

TEST_CASE("Laplacian spectra of standard graphs") {
  check_spectrum(cycle4(), {0, 2, 2, 4});

  Matrix k4(4, 4, 1.0);
  for (std::size_t i = 0; i < 4; ++i) k4(i, i) = 0.0;
  check_spectrum(CommGraph::build(k4), {0, 4, 4, 4});

  const CommGraph path = CommGraph::build(Matrix{{0, 1}, {1, 0}});
  CHECK(max_abs_diff(path.laplacian().matrix(), Matrix{{1, -1}, {-1, 1}}) == 0.0);
  check_spectrum(path, {0, 2});
}

TEST_CASE("lambda_min_positive") {
  CHECK(lambda_min_positive(cycle4()) == doctest::Approx(2.0).epsilon(1e-12));
  Matrix k4(4, 4, 1.0);
  for (std::size_t i = 0; i < 4; ++i) k4(i, i) = 0.0;
  CHECK(lambda_min_positive(CommGraph::build(k4)) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(lambda_min_positive(CommGraph::build(Matrix{{0, 1}, {1, 0}})) ==
        doctest::Approx(2.0).epsilon(1e-12));

  const CommGraph split = CommGraph::from_edges(4, {{0, 1, 1.0}, {2, 3, 1.0}});
  CHECK_THROWS_AS(lambda_min_positive(split), ValidationError);
}

TEST_CASE("is_connected") {
  CHECK(is_connected(cycle4()));
  CHECK_FALSE(is_connected(CommGraph::from_edges(4, {{0, 1, 1.0}, {2, 3, 1.0}})));
  // One vanishing edge leaves a connected path (lambda_2 = 2 - sqrt 2).
  CHECK(is_connected(cycle4(1e-12)));
  // Two opposite vanishing edges split the cycle into two pairs.
  CHECK_FALSE(is_connected(
      CommGraph::from_edges(4, {{0, 1, 1.0}, {1, 2, 1e-12}, {2, 3, 1.0}, {3, 0, 1e-12}})));
}

TEST_CASE("build rejects invalid adjacency and names the entry") {
  auto message = [](const Matrix& a) {
    try {
      (void)CommGraph::build(a);
    } catch (const ValidationError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message(Matrix{{0, 1}, {2, 0}}).find("(0, 1)") != std::string::npos);
  CHECK(message(Matrix{{0, -1}, {-1, 0}}).find("(0, 1)") != std::string::npos);
  CHECK(message(Matrix{{1, 1}, {1, 0}}).find("(0, 0)") != std::string::npos);
  CHECK_FALSE(message(Matrix{{0}}).empty());
  CHECK_FALSE(message(Matrix(2, 3)).empty());
  CHECK_THROWS_AS(CommGraph::from_edges(3, {{0, 0, 1.0}}), ValidationError);
  CHECK_THROWS_AS(CommGraph::from_edges(3, {{0, 3, 1.0}}), ValidationError);
  CHECK_THROWS_AS(CommGraph::from_edges(3, {{0, 1, 1.0}, {1, 0, 1.0}}), ValidationError);
}

TEST_CASE("random connected graphs: Laplacian and spectral identities") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + trial % 9;
    const CommGraph g = CommGraph::build(oracle::random_connected_adjacency(n, rng));
    const Matrix& l = g.laplacian().matrix();
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row += l(i, j);
      CHECK(std::abs(row) < 1e-12);
    }
    CHECK(is_connected(g));
    CHECK(std::abs(g.spectrum().eigenvalues[0]) <= 1e-9);
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(g.spectrum().eigenvectors(i, 0) - inv_sqrt) < 1e-9);
    }

    const Matrix& u = g.u_matrix();
    CHECK(max_abs_diff(u.transpose() * u, Matrix::identity(n - 1)) <= 1e-9);
    const Matrix ones(n, 1, 1.0);
    CHECK((u.transpose() * ones).max_abs() <= 1e-9);
    const Matrix j = (1.0 / static_cast<double>(n)) * (ones * ones.transpose());
    CHECK(max_abs_diff(j + u * u.transpose(), Matrix::identity(n)) <= 1e-9);

    // Lambda matches the oracle spectrum.
    const std::vector<double> ref = oracle::sturm_eigenvalues(l);
    for (std::size_t k = 0; k + 1 < n; ++k) CHECK(std::abs(g.lambda()[k] - ref[k + 1]) < 1e-8);
  }
}

TEST_CASE("neighbors and degree") {
  const CommGraph g = cycle4();
  CHECK(g.neighbors(0) == std::vector<std::size_t>{1, 3});
  CHECK(g.degree(2) == 2);
}
