/*
 *  Copyright (C) 2026 The ctrack Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 *  See the file LICENSE for more information.
 */

#pragma once

#include <cstddef>
#include <vector>

#include "ctrack/numerics.hpp"

namespace ctrack {

/// Weighted undirected edge (0-indexed vertices).
struct Edge {
  std::size_t from = 0;
  std::size_t to = 0;
  double weight = 1.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Fixed undirected communication graph with its Laplacian and the spectral
/// data used by the certification: eigenvectors V, the block U of
/// eigenvectors paired with the N-1 largest eigenvalues, and those
/// eigenvalues (Lambda).
class CommGraph {
 public:
  /// Validates `adjacency` (square, symmetric within 1e-12, zero diagonal,
  /// nonnegative, N >= 2) and builds the Laplacian l_ii = sum_j a_ij,
  /// l_ij = -a_ij.
  static CommGraph build(const Matrix& adjacency);
  static CommGraph from_edges(std::size_t n_agents, const std::vector<Edge>& edges);

  std::size_t size() const noexcept { return adjacency_.rows(); }
  const Matrix& adjacency() const noexcept { return adjacency_; }
  double weight(std::size_t i, std::size_t j) const { return adjacency_(i, j); }
  const SymMatrix& laplacian() const noexcept { return laplacian_; }
  const Spectrum& spectrum() const noexcept { return spectrum_; }
  /// N x (N-1) eigenvector block for the nonzero part of the spectrum.
  const Matrix& u_matrix() const noexcept { return u_; }
  /// The N-1 largest Laplacian eigenvalues, ascending.
  const Vector& lambda() const noexcept { return lambda_; }

  std::vector<std::size_t> neighbors(std::size_t i) const;
  std::size_t degree(std::size_t i) const { return neighbors(i).size(); }

 private:
  CommGraph() = default;

  Matrix adjacency_;
  SymMatrix laplacian_;
  Spectrum spectrum_;
  Matrix u_;
  Vector lambda_;
};

/// Spectral connectivity: lambda_2(L) > 1e-8.
bool is_connected(const CommGraph& g);

/// Smallest positive Laplacian eigenvalue. Throws ValidationError for a
/// disconnected graph, where the stability certificate does not apply.
double lambda_min_positive(const CommGraph& g);

}  // namespace ctrack
