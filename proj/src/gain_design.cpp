/*
 *  Copyright (C) 2026 The ctrack Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 *  See the file LICENSE for more information.
 */

#include "ctrack/gain_design.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace ctrack {

void ObserverGains::validate() const {
  if (k.empty()) throw ValidationError("gains: k must hold at least one gain");
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (!(k[i] > 0.0) || !std::isfinite(k[i])) {
      throw ValidationError("gains: k[" + std::to_string(i + 1) + "] must be positive");
    }
  }
  if (!(alpha > 0.0)) throw ValidationError("gains: alpha must be positive");
  if (!(delta > 0.0)) throw ValidationError("gains: delta must be positive");
  if (!(gamma > 0.0)) throw ValidationError("gains: gamma must be positive");
}

double compute_mu(const ObserverGains& gains) {
  gains.validate();
  if (gains.order() == 1) return gains.delta;
  const double k1 = gains.k[0];
  return (gains.delta * k1 + gains.k[1]) / (k1 * k1);
}

namespace {

// c_l = k_{l+1} / k_l with 1-indexed l.
double ratio(const ObserverGains& g, std::size_t l) { return g.k[l] / g.k[l - 1]; }

}  // namespace

SymMatrix build_qbar(const ObserverGains& gains) {
  gains.validate();
  const std::size_t m = gains.order();
  if (m < 2) {
    throw ValidationError("build_qbar: the LMI is only defined for M >= 2 (got M = " +
                          std::to_string(m) + ")");
  }
  Matrix sbar(m, m);
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      double v = 0.0;
      if (i == 1) {
        v = ratio(gains, m - 1);
      } else if (i == m && j == m) {
        v = gains.delta;
      } else if (i <= j) {
        v = ratio(gains, m - i) - ratio(gains, m - i + 1);
      } else if (i == j + 1) {
        v = -ratio(gains, m - j);
      }
      sbar(i - 1, j - 1) = v;
    }
  }
  return SymMatrix(sbar + sbar.transpose());
}

Vector TransformationP::apply(std::span<const double> x) const { return p * x; }

TransformationP build_transformation(const ObserverGains& gains, std::size_t block_dim) {
  gains.validate();
  if (block_dim == 0) throw ValidationError("build_transformation: block dimension must be >= 1");
  const std::size_t m = gains.order();
  const std::size_t w = block_dim;
  const auto& k = gains.k;

  TransformationP t;
  t.order = m;
  t.block_dim = w;
  t.p = Matrix(m * w, m * w);
  t.p_inv = Matrix(m * w, m * w);

  // 1-indexed block placement.
  auto put = [w](Matrix& a, std::size_t r, std::size_t c, double v) {
    for (std::size_t d = 0; d < w; ++d) a((r - 1) * w + d, (c - 1) * w + d) = v;
  };

  if (m == 1) {
    put(t.p, 1, 1, 1.0 / k[0]);
  } else {
    put(t.p, 1, m - 1, -1.0 / k[m - 2]);
    put(t.p, 1, m, 1.0 / k[m - 1]);
    for (std::size_t i = 2; i + 1 <= m; ++i) {
      put(t.p, i, m - i, -1.0 / k[m - i - 1]);
      put(t.p, i, m - i + 1, 1.0 / k[m - i]);
    }
    put(t.p, m, 1, 1.0 / k[0]);
  }

  for (std::size_t r = 1; r <= m; ++r)
    for (std::size_t c = m - r + 1; c <= m; ++c) put(t.p_inv, r, c, k[r - 1]);
  return t;
}

Matrix closed_form_sigma(const ObserverGains& gains, const SymMatrix& phi) {
  gains.validate();
  const std::size_t m = gains.order();
  const std::size_t w = phi.dim();
  const Matrix eye = Matrix::identity(w);
  if (m == 1) return -gains.k[0] * phi.matrix();

  Matrix sigma(m * w, m * w);
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      Matrix blk;
      if (i == 1) {
        blk = -ratio(gains, m - 1) * eye;
      } else if (i == m && j == m) {
        blk = ratio(gains, 1) * eye - gains.k[0] * phi.matrix();
      } else if (i <= j) {
        blk = (ratio(gains, m - i + 1) - ratio(gains, m - i)) * eye;
      } else if (i == j + 1) {
        blk = ratio(gains, m - j) * eye;
      } else {
        continue;
      }
      sigma.set_block((i - 1) * w, (j - 1) * w, blk);
    }
  }
  return sigma;
}

Matrix build_xi(const ObserverGains& gains, const SymMatrix& phi) {
  gains.validate();
  const std::size_t m = gains.order();
  const std::size_t w = phi.dim();
  Matrix xi(m * w, m * w);
  const Matrix eye = Matrix::identity(w);
  for (std::size_t b = 0; b < m; ++b) {
    xi.set_block(b * w, 0, -gains.k[b] * phi.matrix());
    if (b + 1 < m) xi.set_block(b * w, (b + 1) * w, eye);
  }
  return xi;
}

double mean_observation_lambda_min(std::span<const SymMatrix> observation_blocks) {
  if (observation_blocks.empty()) {
    throw ValidationError("spatial_excitation_margin: need at least one observation block");
  }
  const std::size_t k = observation_blocks.front().dim();
  Matrix sum(k, k);
  for (const SymMatrix& psi : observation_blocks) {
    if (psi.dim() != k) throw ValidationError("spatial_excitation_margin: block size mismatch");
    sum += psi.matrix();
  }
  sum *= 1.0 / static_cast<double>(observation_blocks.size());
  return lambda_min(SymMatrix(sum));
}

double spatial_excitation_margin(std::span<const SymMatrix> observation_blocks, double mu,
                                 double gamma) {
  return mean_observation_lambda_min(observation_blocks) - (mu + gamma);
}

double consensus_alpha_bound(double mu, double gamma, double lambda_min,
                             std::optional<std::span<const SymMatrix>> psi_blocks) {
  if (!(gamma > 0.0)) throw ValidationError("consensus_alpha_bound: gamma must be positive");
  if (!(lambda_min > 0.0)) {
    throw ValidationError("consensus_alpha_bound: lambda_min must be positive");
  }
  double spread = std::abs(1.0 / gamma - 1.0);  // norm of (1/gamma - 1) * Psi
  if (psi_blocks) {
    spread = 0.0;
    for (const SymMatrix& psi : *psi_blocks) {
      const Matrix sq = psi.matrix() * psi.matrix();
      spread = std::max(spread, spectral_norm((1.0 / gamma) * sq - psi.matrix()));
    }
  }
  return (mu + spread) / lambda_min;
}

CertificationReport certify(const ObserverGains& gains, const CommGraph& graph,
                            std::span<const SymMatrix> observation_blocks) {
  gains.validate();
  if (observation_blocks.size() != graph.size()) {
    throw ValidationError("certify: " + std::to_string(observation_blocks.size()) +
                          " observation blocks for a graph of " + std::to_string(graph.size()) +
                          " agents");
  }
  const std::size_t k = observation_blocks.front().dim();
  for (const SymMatrix& psi : observation_blocks) {
    if (psi.dim() != k) throw ValidationError("certify: observation blocks differ in size");
  }

  CertificationReport r;
  r.order = gains.order();
  r.connected = is_connected(graph);
  r.mu = compute_mu(gains);
  r.spatial_lambda_min = mean_observation_lambda_min(observation_blocks);
  r.spatial_margin = r.spatial_lambda_min - (r.mu + gains.gamma);
  r.spatial_ok = r.spatial_margin > 0.0;
  r.alpha = gains.alpha;
  if (r.connected) {
    r.lambda_min_laplacian = lambda_min_positive(graph);
    r.alpha_bound = consensus_alpha_bound(r.mu, gains.gamma, r.lambda_min_laplacian,
                                          observation_blocks);
    r.alpha_ok = gains.alpha > r.alpha_bound;
  } else {
    r.alpha_bound = std::numeric_limits<double>::infinity();
    r.alpha_ok = false;
  }

  if (gains.order() == 1) {
    r.lmi_ok = true;
    r.rate_bound = gains.delta * gains.k[0];
  } else {
    const double qmin = lambda_min(build_qbar(gains));
    r.qbar_lambda_min = qmin;
    r.lmi_ok = gains.order() <= 2 ? true : qmin > 0.0;
    r.rate_bound = 0.5 * qmin;
  }
  r.overall = r.connected && r.spatial_ok && r.alpha_ok && r.lmi_ok;
  return r;
}

bool schur_pd_check(const SymMatrix& a, const Matrix& b, const SymMatrix& c, double gamma) {
  if (!(gamma > 0.0)) throw ValidationError("schur_pd_check: gamma must be positive");
  if (b.rows() != a.dim() || b.cols() != c.dim()) {
    throw ValidationError("schur_pd_check: B must be dim(A) x dim(C)");
  }
  if (!is_pd(c, gamma)) {
    throw ValidationError("schur_pd_check: hypothesis C > gamma I does not hold");
  }
  const Matrix bbt = b * b.transpose();
  return is_pd(SymMatrix(a.matrix() - (1.0 / gamma) * bbt));
}

namespace {

std::string yes_no(bool v) { return v ? "pass" : "FAIL"; }

}  // namespace

std::string to_text(const CertificationReport& r) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "order: " << r.order << '\n';
  os << "connected: " << yes_no(r.connected) << '\n';
  os << "lambda_min_laplacian: " << r.lambda_min_laplacian << '\n';
  os << "mu: " << r.mu << '\n';
  os << "spatial_lambda_min: " << r.spatial_lambda_min << '\n';
  os << "spatial_margin: " << r.spatial_margin << '\n';
  os << "spatial_condition: " << yes_no(r.spatial_ok) << '\n';
  os << "alpha: " << r.alpha << '\n';
  os << "alpha_bound: " << r.alpha_bound << '\n';
  os << "alpha_condition: " << yes_no(r.alpha_ok) << '\n';
  if (r.qbar_lambda_min) os << "qbar_lambda_min: " << *r.qbar_lambda_min << '\n';
  os << "lmi_condition: " << yes_no(r.lmi_ok) << '\n';
  os << "rate_bound: " << r.rate_bound << '\n';
  os << "overall: " << yes_no(r.overall) << '\n';
  return os.str();
}

std::string to_json(const CertificationReport& r) {
  nlohmann::json j;
  j["order"] = r.order;
  j["connected"] = r.connected;
  j["lambda_min_laplacian"] = r.lambda_min_laplacian;
  j["mu"] = r.mu;
  j["spatial_lambda_min"] = r.spatial_lambda_min;
  j["spatial_margin"] = r.spatial_margin;
  j["spatial_ok"] = r.spatial_ok;
  j["alpha"] = r.alpha;
  j["alpha_bound"] = std::isfinite(r.alpha_bound) ? nlohmann::json(r.alpha_bound) : nlohmann::json();
  j["alpha_ok"] = r.alpha_ok;
  j["qbar_lambda_min"] = r.qbar_lambda_min ? nlohmann::json(*r.qbar_lambda_min) : nlohmann::json();
  j["lmi_ok"] = r.lmi_ok;
  j["rate_bound"] = r.rate_bound;
  j["overall"] = r.overall;
  return j.dump();
}

}  // namespace ctrack
