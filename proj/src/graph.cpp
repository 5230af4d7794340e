/*
 *  Copyright (C) 2026 The ctrack Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 *  See the file LICENSE for more information.
 */

#include "ctrack/graph.hpp"

#include <string>

#include "ctrack/constants.hpp"

namespace ctrack {

namespace {

std::string entry(std::size_t i, std::size_t j) {
  return "(" + std::to_string(i) + ", " + std::to_string(j) + ")";
}

}  // namespace

CommGraph CommGraph::build(const Matrix& adjacency) {
  const std::size_t n = adjacency.rows();
  if (adjacency.cols() != n) throw ValidationError("build_graph: adjacency is not square");
  if (n < 2) throw ValidationError("build_graph: need at least 2 agents, got " + std::to_string(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (adjacency(i, i) != 0.0) {
      throw ValidationError("build_graph: self-edge at entry " + entry(i, i));
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double w = adjacency(i, j);
      if (!std::isfinite(w)) throw ValidationError("build_graph: non-finite weight at " + entry(i, j));
      if (w < 0.0) throw ValidationError("build_graph: negative weight at " + entry(i, j));
      if (std::abs(w - adjacency(j, i)) > tol::kAdjacencySymmetry) {
        throw ValidationError("build_graph: asymmetric weight at " + entry(i, j));
      }
    }
  }

  CommGraph g;
  g.adjacency_ = adjacency;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double avg = 0.5 * (adjacency(i, j) + adjacency(j, i));
      g.adjacency_(i, j) = avg;
      g.adjacency_(j, i) = avg;
    }

  Matrix lap(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double deg = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      lap(i, j) = -g.adjacency_(i, j);
      deg += g.adjacency_(i, j);
    }
    lap(i, i) = deg;
  }
  g.laplacian_ = SymMatrix(lap);
  g.spectrum_ = sym_eigen(g.laplacian_);
  g.u_ = g.spectrum_.eigenvectors.block(0, 1, n, n - 1);
  g.lambda_.assign(g.spectrum_.eigenvalues.begin() + 1, g.spectrum_.eigenvalues.end());
  return g;
}

CommGraph CommGraph::from_edges(std::size_t n_agents, const std::vector<Edge>& edges) {
  Matrix a(n_agents, n_agents);
  for (const Edge& e : edges) {
    if (e.from >= n_agents || e.to >= n_agents) {
      throw ValidationError("build_graph: edge " + entry(e.from, e.to) + " references a vertex >= " +
                            std::to_string(n_agents));
    }
    if (e.from == e.to) throw ValidationError("build_graph: self-edge at entry " + entry(e.from, e.to));
    if (a(e.from, e.to) != 0.0) {
      throw ValidationError("build_graph: duplicate edge " + entry(e.from, e.to));
    }
    a(e.from, e.to) = e.weight;
    a(e.to, e.from) = e.weight;
  }
  return build(a);
}

std::vector<std::size_t> CommGraph::neighbors(std::size_t i) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < size(); ++j)
    if (j != i && adjacency_(i, j) > 0.0) out.push_back(j);
  return out;
}

bool is_connected(const CommGraph& g) { return g.spectrum().eigenvalues[1] > tol::kConnectivity; }

double lambda_min_positive(const CommGraph& g) {
  if (!is_connected(g)) {
    throw ValidationError(
        "lambda_min_positive: graph is disconnected (lambda_2 = " +
        std::to_string(g.spectrum().eigenvalues[1]) +
        "); the consensus stability certificate requires a fixed, undirected, connected graph");
  }
  return g.lambda().front();
}

}  // namespace ctrack
