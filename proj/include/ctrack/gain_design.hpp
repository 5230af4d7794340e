/*
 *  Copyright (C) 2026 The ctrack Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 *  See the file LICENSE for more information.
 */

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctrack/graph.hpp"
#include "ctrack/numerics.hpp"

namespace ctrack {

/// Fixed observer gains plus the two analysis parameters used to certify them.
///
/// `k` holds k_1..k_M (one per integrator in the observer), `alpha` is the
/// consensus coupling gain. `delta` sets the prescribed decay rate and
/// `gamma` the lower bound assumed on the averaged observation matrix; they
/// do not enter the observer itself.
struct ObserverGains {
  std::vector<double> k;
  double alpha = 0.0;
  double delta = 0.0;
  double gamma = 0.0;

  std::size_t order() const noexcept { return k.size(); }
  /// Throws ValidationError unless M >= 1 and every entry is strictly positive.
  void validate() const;

  friend bool operator==(const ObserverGains&, const ObserverGains&) = default;
};

/// Outcome of every stability condition for one configuration.
struct CertificationReport {
  std::size_t order = 0;
  bool connected = false;
  double lambda_min_laplacian = 0.0;  // 0 when disconnected
  double mu = 0.0;
  double spatial_lambda_min = 0.0;    // lambda_min of the mean observation matrix
  double spatial_margin = 0.0;        // spatial_lambda_min - (mu + gamma)
  bool spatial_ok = false;
  double alpha = 0.0;
  double alpha_bound = 0.0;
  bool alpha_ok = false;
  std::optional<double> qbar_lambda_min;  // M >= 2 only
  bool lmi_ok = false;
  double rate_bound = 0.0;  // exponential rate on ||eta||, 1/s
  bool overall = false;
};

std::string to_text(const CertificationReport& r);
std::string to_json(const CertificationReport& r);

/// mu = delta for M = 1, (delta k_1 + k_2) / k_1^2 for M >= 2.
double compute_mu(const ObserverGains& gains);

/// The constant LMI matrix Qbar = Sbar + Sbar^T built from the gain ratios
/// c_l = k_{l+1} / k_l and delta. Throws ValidationError for M < 2.
///
/// Sbar(i,j), 1-indexed:
///   i = 1                       ->  c_{M-1}
///   (i,j) = (M,M)               ->  delta
///   2 <= i <= j                 ->  c_{M-i} - c_{M-i+1}
///   i = j + 1                   ->  -c_{M-j}
///   i > j + 1                   ->  0
SymMatrix build_qbar(const ObserverGains& gains);

/// Time-invariant change of coordinates eta = P xi that moves Phi into the
/// last diagonal block of the error dynamics.
struct TransformationP {
  std::size_t order = 0;
  std::size_t block_dim = 0;
  Matrix p;
  Matrix p_inv;

  /// P * x for a stacked vector of `order` blocks of size `block_dim`.
  Vector apply(std::span<const double> x) const;
};

/// Builds P and its closed-form inverse (block row r of P^{-1} equals k_r I
/// from block column M - r + 1 onward, zero before).
TransformationP build_transformation(const ObserverGains& gains, std::size_t block_dim);

/// Sigma = P Xi(Phi) P^{-1}, evaluated from its closed-form block expression.
Matrix closed_form_sigma(const ObserverGains& gains, const SymMatrix& phi);

/// Error-dynamics matrix Xi(Phi): block (m,1) = -k_m Phi, block (m,m+1) = I.
Matrix build_xi(const ObserverGains& gains, const SymMatrix& phi);

/// lambda_min(mean_i Psi_i) - (mu + gamma). Positive iff the spatial
/// excitation condition holds. Agents without measurements contribute a
/// zero block but still count towards N.
double spatial_excitation_margin(std::span<const SymMatrix> observation_blocks, double mu,
                                 double gamma);

/// lambda_min of the averaged observation matrix.
double mean_observation_lambda_min(std::span<const SymMatrix> observation_blocks);

/// Lower bound on the consensus gain alpha.
///
/// With `psi_blocks`: (mu + ||Psi^2 / gamma - Psi||) / lambda_min with Psi
/// the block-diagonal stack; the norm of a block-diagonal matrix is the
/// largest block norm. Without: the idempotent (bearing) form
/// (mu + 1/gamma - 1) / lambda_min.
double consensus_alpha_bound(double mu, double gamma, double lambda_min,
                             std::optional<std::span<const SymMatrix>> psi_blocks = std::nullopt);

/// Evaluates connectivity, the spatial excitation condition, the consensus
/// gain bound and (M >= 3) the LMI, for observation blocks sampled at one
/// time instant. Throws ValidationError on dimension mismatch.
CertificationReport certify(const ObserverGains& gains, const CommGraph& graph,
                            std::span<const SymMatrix> observation_blocks);

/// Conservative Schur-complement test: given C > gamma I, returns whether
/// A - B B^T / gamma > 0, which implies A - B C^{-1} B^T > 0. Throws
/// ValidationError when C > gamma I does not hold.
bool schur_pd_check(const SymMatrix& a, const Matrix& b, const SymMatrix& c, double gamma);

}  // namespace ctrack
