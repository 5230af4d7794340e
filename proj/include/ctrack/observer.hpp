/*
 *  Copyright (C) 2026 The ctrack Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 *  See the file LICENSE for more information.
 */

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ctrack/gain_design.hpp"
#include "ctrack/numerics.hpp"

namespace ctrack {

/// One agent's estimate of the integrator chain: blocks[m] is the estimate
/// of the m-th derivative of the observed quantity (position, velocity, ...).
struct AgentState {
  std::size_t agent = 0;
  std::vector<Vector> blocks;

  std::size_t order() const noexcept { return blocks.size(); }
  std::size_t block_dim() const noexcept { return blocks.empty() ? 0 : blocks.front().size(); }
};

/// Measurement in the form y = Psi x^(0). An agent without a measurement
/// carries Psi = 0, y = 0 and available = false.
struct Measurement {
  std::size_t agent = 0;
  bool available = false;
  SymMatrix psi;
  Vector y;

  static Measurement unavailable(std::size_t agent, std::size_t block_dim);
};

/// What an agent receives from a neighbour: the neighbour's first block,
/// weighted by the adjacency entry a_ij.
struct NeighborEstimate {
  std::size_t neighbor = 0;
  double weight = 0.0;
  Vector position;
};

/// delta_i = y_i - Psi_i xhat_i^(0) - alpha sum_j a_ij (xhat_i^(0) - xhat_j^(0)).
/// The innovation part is dropped when the measurement is unavailable.
Vector correction_term(const AgentState& state, const Measurement& meas,
                       std::span<const NeighborEstimate> neighbors, double alpha);

/// Chain replica driven by the correction:
/// d/dt xhat^(m) = xhat^(m+1) + k_{m+1} delta, and k_M delta for the top block.
AgentState observer_derivative(const AgentState& state, std::span<const double> delta,
                               const ObserverGains& gains);

/// Bearing b seen from `agent_pos`, expressed as Psi = I - b b^T, y = Psi p_agent.
Measurement bearing_measurement(std::size_t agent, const Vec3& agent_pos, const Vec3& bearing);

/// The only data an agent broadcasts: its first block.
Vector broadcast_payload(const AgentState& state);

/// Number of reals in one broadcast.
inline std::size_t payload_size(const AgentState& state) { return state.block_dim(); }

}  // namespace ctrack
