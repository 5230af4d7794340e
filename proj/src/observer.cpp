/*
 *  Copyright (C) 2026 The ctrack Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 *  See the file LICENSE for more information.
 */

#include "ctrack/observer.hpp"

namespace ctrack {

Measurement Measurement::unavailable(std::size_t agent, std::size_t block_dim) {
  return Measurement{agent, false, SymMatrix::zero(block_dim), Vector(block_dim, 0.0)};
}

Vector correction_term(const AgentState& state, const Measurement& meas,
                       std::span<const NeighborEstimate> neighbors, double alpha) {
  if (state.blocks.empty()) throw ValidationError("correction_term: empty agent state");
  const Vector& own = state.blocks.front();
  const std::size_t k = own.size();

  Vector delta(k, 0.0);
  if (meas.available) {
    if (meas.psi.dim() != k || meas.y.size() != k) {
      throw ValidationError("correction_term: measurement dimension mismatch");
    }
    const Vector predicted = meas.psi.matrix() * own;
    for (std::size_t d = 0; d < k; ++d) delta[d] = meas.y[d] - predicted[d];
  }
  for (const NeighborEstimate& n : neighbors) {
    if (n.position.size() != k) throw ValidationError("correction_term: neighbour dimension mismatch");
    const double w = alpha * n.weight;
    for (std::size_t d = 0; d < k; ++d) delta[d] -= w * (own[d] - n.position[d]);
  }
  return delta;
}

AgentState observer_derivative(const AgentState& state, std::span<const double> delta,
                               const ObserverGains& gains) {
  const std::size_t m = state.order();
  if (gains.order() != m) {
    throw ValidationError("observer_derivative: gains order " + std::to_string(gains.order()) +
                          " does not match state order " + std::to_string(m));
  }
  const std::size_t k = state.block_dim();
  if (delta.size() != k) throw ValidationError("observer_derivative: correction size mismatch");

  AgentState d{state.agent, std::vector<Vector>(m, Vector(k, 0.0))};
  for (std::size_t b = 0; b < m; ++b) {
    for (std::size_t i = 0; i < k; ++i) {
      const double chain = b + 1 < m ? state.blocks[b + 1][i] : 0.0;
      d.blocks[b][i] = chain + gains.k[b] * delta[i];
    }
  }
  return d;
}

Measurement bearing_measurement(std::size_t agent, const Vec3& agent_pos, const Vec3& bearing) {
  SymMatrix psi = projection_matrix(bearing);
  Vector y = psi.matrix() * std::span<const double>(agent_pos);
  return Measurement{agent, true, std::move(psi), std::move(y)};
}

Vector broadcast_payload(const AgentState& state) {
  if (state.blocks.empty()) throw ValidationError("broadcast_payload: empty agent state");
  return state.blocks.front();
}

}  // namespace ctrack
