/*
 *  Copyright (C) 2026 The ctrack Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 *  See the file LICENSE for more information.
 */

#include "ctrack/dkf.hpp"

#include <algorithm>
#include <string>

namespace ctrack {

InformationPair make_information_pair(const SymMatrix& omega, std::span<const double> x) {
  return InformationPair{omega, omega.matrix() * x};
}

Matrix metropolis_weights(const CommGraph& graph) {
  const std::size_t n = graph.size();
  Matrix w(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double off = 0.0;
    for (std::size_t j : graph.neighbors(i)) {
      w(i, j) = 1.0 / (1.0 + static_cast<double>(std::max(graph.degree(i), graph.degree(j))));
      off += w(i, j);
    }
    w(i, i) = 1.0 - off;
  }
  return w;
}

std::vector<InformationPair> consensus_average(std::span<const InformationPair> pairs,
                                               const Matrix& weights, std::size_t iters) {
  const std::size_t n = pairs.size();
  if (weights.rows() != n || weights.cols() != n) {
    throw ValidationError("consensus_average: weight matrix does not match the number of agents");
  }
  std::vector<InformationPair> cur(pairs.begin(), pairs.end());
  for (std::size_t it = 0; it < iters; ++it) {
    std::vector<InformationPair> next;
    next.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t d = cur[i].omega.dim();
      Matrix omega(d, d);
      Vector q(d, 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        const double w = weights(i, j);
        if (w == 0.0) continue;
        omega += w * cur[j].omega.matrix();
        for (std::size_t r = 0; r < d; ++r) q[r] += w * cur[j].q[r];
      }
      next.push_back(InformationPair{SymMatrix(omega), std::move(q)});
    }
    cur = std::move(next);
  }
  return cur;
}

Matrix cv_transition(double h) {
  Matrix f = Matrix::identity(kDkfStateDim);
  for (std::size_t i = 0; i < 3; ++i) f(i, i + 3) = h;
  return f;
}

SymMatrix cv_process_noise(double h, double density) {
  // Per axis: integral over [0,h] of [[1 + s^2, s], [s, 1]] ds.
  Matrix q(kDkfStateDim, kDkfStateDim);
  for (std::size_t i = 0; i < 3; ++i) {
    q(i, i) = density * (h + h * h * h / 3.0);
    q(i, i + 3) = density * (h * h / 2.0);
    q(i + 3, i) = q(i, i + 3);
    q(i + 3, i + 3) = density * h;
  }
  return SymMatrix(q);
}

namespace {

SymMatrix covariance_of(const SymMatrix& omega) {
  try {
    return spd_inverse(omega);
  } catch (const NumericalError& e) {
    throw NumericalError(
        std::string("dkf: information matrix is singular, insufficient information (") + e.what() +
        ")");
  }
}

}  // namespace

Vector information_estimate(const InformationPair& pair) {
  return covariance_of(pair.omega).matrix() * pair.q;
}

DkfStepResult dkf_step(std::span<const InformationPair> pairs,
                       std::span<const Measurement> measurements, std::size_t consensus_iters,
                       const CommGraph& graph, double h, const DkfParams& params) {
  const std::size_t n = graph.size();
  if (pairs.size() != n || measurements.size() != n) {
    throw ValidationError("dkf_step: expected " + std::to_string(n) + " pairs and measurements");
  }
  if (consensus_iters < 1) throw ValidationError("dkf_step: consensus_iters must be >= 1");
  if (!(h > 0.0)) throw ValidationError("dkf_step: step must be positive");
  const double r_inv = 1.0 / params.measurement_noise;

  std::vector<InformationPair> local;
  local.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (pairs[i].omega.dim() != kDkfStateDim || pairs[i].q.size() != kDkfStateDim) {
      throw ValidationError("dkf_step: information pairs must be 6-dimensional");
    }
    Matrix omega = pairs[i].omega.matrix();
    Vector q = pairs[i].q;
    const Measurement& m = measurements[i];
    if (m.available) {
      // H = [Psi, 0]; H^T R^{-1} H and H^T R^{-1} y only touch the position block.
      const Matrix psi_t_psi = m.psi.matrix().transpose() * m.psi.matrix();
      const Vector psi_t_y = m.psi.matrix().transpose() * m.y;
      for (std::size_t r = 0; r < 3; ++r) {
        for (std::size_t c = 0; c < 3; ++c) omega(r, c) += r_inv * psi_t_psi(r, c);
        q[r] += r_inv * psi_t_y[r];
      }
    }
    local.push_back(InformationPair{SymMatrix(omega), std::move(q)});
  }

  const auto fused = consensus_average(local, metropolis_weights(graph), consensus_iters);

  const Matrix f = cv_transition(h);
  const SymMatrix qd = cv_process_noise(h, params.process_noise);
  DkfStepResult out;
  out.pairs.reserve(n);
  out.estimates.reserve(n);
  for (const InformationPair& p : fused) {
    const SymMatrix cov = covariance_of(p.omega);
    Vector x = cov.matrix() * p.q;
    out.estimates.push_back(x);
    const SymMatrix cov_pred(f * cov.matrix() * f.transpose() + qd.matrix());
    const SymMatrix omega_pred = spd_inverse(cov_pred);
    out.pairs.push_back(make_information_pair(omega_pred, f * x));
  }
  return out;
}

}  // namespace ctrack
