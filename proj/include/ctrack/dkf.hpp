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

#include "ctrack/graph.hpp"
#include "ctrack/numerics.hpp"
#include "ctrack/observer.hpp"

namespace ctrack {

/// Constant-velocity state [p; v] in 3-D.
inline constexpr std::size_t kDkfStateDim = 6;

/// Information-form estimate: Omega = P^{-1}, q = Omega x.
struct InformationPair {
  SymMatrix omega;
  Vector q;
};

struct DkfParams {
  double process_noise = 1.0;      // Q = process_noise * I_6 (continuous-time density)
  double measurement_noise = 0.01;  // R = measurement_noise * I_3
};

struct DkfStepResult {
  /// Predicted pairs for the next step.
  std::vector<InformationPair> pairs;
  /// Posterior estimates at the current step (after consensus).
  std::vector<Vector> estimates;
};

InformationPair make_information_pair(const SymMatrix& omega, std::span<const double> x);

/// Metropolis weights: w_ij = 1 / (1 + max(d_i, d_j)) on edges and
/// w_ii = 1 - sum_j w_ij. Doubly stochastic on any undirected graph.
Matrix metropolis_weights(const CommGraph& graph);

/// `iters` rounds of weighted averaging of the information pairs.
std::vector<InformationPair> consensus_average(std::span<const InformationPair> pairs,
                                               const Matrix& weights, std::size_t iters);

/// Exact discretisation of the constant-velocity model over `h`:
/// F = [I, hI; 0, I] and Q_d = integral of e^{As} Q e^{A^T s} ds.
Matrix cv_transition(double h);
SymMatrix cv_process_noise(double h, double density);

/// Estimate Omega^{-1} q. Throws NumericalError when Omega is singular.
Vector information_estimate(const InformationPair& pair);

/// One filter cycle: local information update with the (Psi, y)
/// pseudo-measurement, `consensus_iters` rounds of averaging, estimate
/// extraction, and prediction over `h`.
DkfStepResult dkf_step(std::span<const InformationPair> pairs,
                       std::span<const Measurement> measurements, std::size_t consensus_iters,
                       const CommGraph& graph, double h, const DkfParams& params = {});

}  // namespace ctrack
