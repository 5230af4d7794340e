/*
 *  Copyright (C) 2026 The ctrack Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 *  See the file LICENSE for more information.
 */

#include <cmath>
#include <random>

#include "ctrack/gain_design.hpp"
#include "doctest.h"
#include "json.hpp"
#include "support/oracles.hpp"

using namespace ctrack;

namespace {

const ObserverGains kCv{{5.0, 3.5}, 15.9, 0.8, 0.1};
const ObserverGains kCa{{10.0, 3.7, 0.5}, 15.5, 0.3, 0.1};

CommGraph cycle4() {
  return CommGraph::from_edges(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {3, 0, 1.0}});
}

std::vector<SymMatrix> square_blocks(const Vec3& target) {
  const Vec3 agents[] = {{-10, 10, 2}, {10, 10, 2}, {10, -10, 2}, {-10, -10, 2}};
  std::vector<SymMatrix> out;
  for (const Vec3& p : agents) out.push_back(projection_matrix(normalized(target - p)));
  return out;
}

Matrix block_diag(const std::vector<SymMatrix>& blocks) {
  const std::size_t k = blocks.front().dim();
  Matrix out(k * blocks.size(), k * blocks.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) out.set_block(i * k, i * k, blocks[i].matrix());
  return out;
}

}  // namespace

TEST_CASE("compute_mu") {
  CHECK(compute_mu({{2.0}, 1.0, 0.8, 0.1}) == doctest::Approx(0.8));
  CHECK(compute_mu(kCv) == doctest::Approx(0.30).epsilon(1e-14));
  CHECK(compute_mu(kCa) == doctest::Approx(0.067).epsilon(1e-14));

  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const ObserverGains g = oracle::random_gains(2 + i % 3, rng);
    CHECK(compute_mu(g) == doctest::Approx((g.delta * g.k[0] + g.k[1]) / (g.k[0] * g.k[0])));
  }
  CHECK_THROWS_AS(compute_mu({{1.0, -1.0}, 1.0, 1.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(compute_mu({{}, 1.0, 1.0, 1.0}), ValidationError);
}

TEST_CASE("build_qbar closed forms") {
  const SymMatrix q2 = build_qbar(kCv);
  CHECK(max_abs_diff(q2.matrix(), Matrix{{1.4, 0.0}, {0.0, 1.6}}) < 1e-14);

  const SymMatrix q3 = build_qbar(kCa);
  const double c1 = 3.7 / 10.0, c2 = 0.5 / 3.7;
  const Matrix expect = 2.0 * Matrix{{c2, 0.0, c2 / 2.0}, {0.0, c1 - c2, -c2 / 2.0}, {c2 / 2.0, -c2 / 2.0, 0.3}};
  CHECK(max_abs_diff(q3.matrix(), expect) < 1e-14);
  CHECK(std::abs(q3(0, 0) - 2 * 0.135135) < 1e-6);
  CHECK(std::abs(q3(1, 1) - 2 * 0.234865) < 1e-6);
  CHECK(std::abs(q3(0, 2) - 2 * 0.067568) < 1e-6);
  CHECK(is_pd(q3));

  CHECK_THROWS_AS(build_qbar({{2.0}, 1.0, 1.0, 1.0}), ValidationError);
}

TEST_CASE("build_qbar is PD for every second-order design") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 500; ++i) CHECK(is_pd(build_qbar(oracle::random_gains(2, rng))));
}

TEST_CASE("build_transformation") {
  const TransformationP t1 = build_transformation({{2.0}, 1.0, 1.0, 1.0}, 1);
  CHECK(t1.p(0, 0) == 0.5);
  CHECK(t1.p_inv(0, 0) == 2.0);

  const TransformationP t2 = build_transformation(kCv, 1);
  CHECK(max_abs_diff(t2.p, Matrix{{-0.2, 1.0 / 3.5}, {0.2, 0.0}}) < 1e-15);
  CHECK(max_abs_diff(t2.p_inv, Matrix{{0.0, 5.0}, {3.5, 3.5}}) < 1e-15);

  const TransformationP t3 = build_transformation(kCa, 1);
  CHECK(max_abs_diff(t3.p * t3.p_inv, Matrix::identity(3)) < 1e-12);
  CHECK(max_abs_diff(t3.p_inv, Matrix{{0, 0, 10}, {0, 3.7, 3.7}, {0.5, 0.5, 0.5}}) == 0.0);

  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const std::size_t m = 1 + i % 4, w = 1 + i % 3;
    const ObserverGains g = oracle::random_gains(m, rng);
    const TransformationP t = build_transformation(g, w);
    CHECK(max_abs_diff(t.p * t.p_inv, Matrix::identity(m * w)) <= 1e-9);
    CHECK(max_abs_diff(t.p_inv, oracle::gauss_inverse(t.p)) <= 1e-9 * t.p_inv.max_abs());
    // Row 1 touches only block columns M-1 and M; row M only column 1.
    for (std::size_t c = 1; c <= m; ++c) {
      const bool row1 = (m >= 2 && c == m - 1) || c == m;
      CHECK((t.p.block(0, (c - 1) * w, w, w).max_abs() != 0.0) == row1);
      CHECK((t.p.block((m - 1) * w, (c - 1) * w, w, w).max_abs() != 0.0) == (c == 1));
    }
  }
}

TEST_CASE("build_xi and closed_form_sigma examples") {
  const SymMatrix one{{1.0}};
  CHECK(max_abs_diff(build_xi(kCv, one), Matrix{{-5, 1}, {-3.5, 0}}) == 0.0);
  CHECK(max_abs_diff(closed_form_sigma(kCv, one), Matrix{{-0.7, -0.7}, {0.7, 0.7 - 5.0}}) < 1e-15);
  CHECK(max_abs_diff(closed_form_sigma({{2.0}, 1, 1, 1}, SymMatrix::identity(3)),
                     -2.0 * Matrix::identity(3)) == 0.0);
  CHECK(max_abs_diff(build_xi({{2.0}, 1, 1, 1}, SymMatrix::identity(2)), -2.0 * Matrix::identity(2)) == 0.0);

  const Matrix xi3 = build_xi(kCa, SymMatrix::identity(2));
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) {
      const Matrix b = xi3.block(2 * r, 2 * c, 2, 2);
      if (c == 0) {
        CHECK(max_abs_diff(b, -kCa.k[r] * Matrix::identity(2)) == 0.0);
      } else if (c == r + 1) {
        CHECK(max_abs_diff(b, Matrix::identity(2)) == 0.0);
      } else {
        CHECK(b.max_abs() == 0.0);
      }
    }
}

TEST_CASE("similarity: P Xi P^-1 equals the closed-form Sigma") {
  std::mt19937_64 rng(4);
  double worst = 0.0;
  for (int i = 0; i < 300; ++i) {
    const std::size_t m = 1 + i % 4, w = 1 + (i / 4) % 3;
    const ObserverGains g = oracle::random_gains(m, rng);
    const SymMatrix phi = oracle::random_spd(w, rng);
    const TransformationP t = build_transformation(g, w);
    worst = std::max(worst, max_abs_diff(t.p * build_xi(g, phi) * t.p_inv, closed_form_sigma(g, phi)));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("Qbar is the negated symmetric part of Sigma with k1 Phi - c1 replaced by delta") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const std::size_t m = 2 + i % 3;
    const ObserverGains g = oracle::random_gains(m, rng);
    const SymMatrix phi{{std::uniform_real_distribution<double>(0.1, 3.0)(rng)}};
    Matrix s = closed_form_sigma(g, phi);
    s(m - 1, m - 1) = -g.delta;
    const Matrix q = -1.0 * (s + s.transpose());
    CHECK(max_abs_diff(q, build_qbar(g).matrix()) <= 1e-12);
  }
}

TEST_CASE("spatial_excitation_margin") {
  const std::vector<SymMatrix> orth{projection_matrix({1, 0, 0}), projection_matrix({0, 1, 0})};
  CHECK(mean_observation_lambda_min(orth) == doctest::Approx(0.5));
  CHECK(spatial_excitation_margin(orth, 0.3, 0.1) == doctest::Approx(0.1));

  const std::vector<SymMatrix> same{projection_matrix({0, 0, 1}), projection_matrix({0, 0, 1})};
  CHECK(spatial_excitation_margin(same, 1e-6, 1e-6) < 0.0);

  const auto blocks = square_blocks({0, -15, 0});
  CHECK(spatial_excitation_margin(blocks, 0.3, 0.1) > 0.0);
  CHECK(mean_observation_lambda_min(blocks) == doctest::Approx(oracle::sturm_lambda_min(
                                                   0.25 * (blocks[0].matrix() + blocks[1].matrix() +
                                                           blocks[2].matrix() + blocks[3].matrix()))));
}

TEST_CASE("consensus_alpha_bound") {
  CHECK(consensus_alpha_bound(0.3, 0.1, 2.0) == doctest::Approx(4.65).epsilon(1e-14));
  CHECK(consensus_alpha_bound(0.8, 0.1, 2.0) == doctest::Approx(4.90).epsilon(1e-14));

  const auto blocks = square_blocks({3, -7, 1});
  CHECK(consensus_alpha_bound(0.3, 0.1, 2.0, blocks) ==
        doctest::Approx(consensus_alpha_bound(0.3, 0.1, 2.0)).epsilon(1e-12));

  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.05, 3.0);
  for (int i = 0; i < 200; ++i) {
    const double mu = u(rng), gamma = u(rng), lam = u(rng), d = u(rng);
    CHECK(consensus_alpha_bound(mu, gamma, lam + d) < consensus_alpha_bound(mu, gamma, lam));
    CHECK(consensus_alpha_bound(mu + d, gamma, lam) > consensus_alpha_bound(mu, gamma, lam));
    // |1/gamma - 1| falls only while gamma <= 1.
    const double g_lo = 0.5 * std::min(gamma, 1.0), g_hi = std::min(gamma, 1.0);
    CHECK(consensus_alpha_bound(mu, g_hi, lam) < consensus_alpha_bound(mu, g_lo, lam));
    CHECK(consensus_alpha_bound(mu, 1.0 + gamma + d, lam) > consensus_alpha_bound(mu, 1.0 + gamma, lam));
  }
  CHECK_THROWS_AS(consensus_alpha_bound(0.3, 0.0, 2.0), ValidationError);
  CHECK_THROWS_AS(consensus_alpha_bound(0.3, 0.1, 0.0), ValidationError);
}

TEST_CASE("certify: constant-velocity design") {
  const CertificationReport r = certify(kCv, cycle4(), square_blocks({0, -15, 0}));
  CHECK(r.connected);
  CHECK(r.mu + 0.1 == doctest::Approx(0.4));
  CHECK(r.spatial_ok);
  CHECK(r.alpha_bound == doctest::Approx(4.65));
  CHECK(r.alpha_ok);
  CHECK(r.lmi_ok);
  CHECK(r.rate_bound == doctest::Approx(0.7));
  CHECK(r.overall);

  const std::string text = to_text(r);
  CHECK(text.find("overall: pass") != std::string::npos);
  const auto j = nlohmann::json::parse(to_json(r));
  CHECK(j.at("overall").get<bool>());
  CHECK(j.at("alpha_bound").get<double>() == doctest::Approx(4.65));
}

TEST_CASE("certify: constant-acceleration design and first-order design") {
  const CertificationReport r = certify(kCa, cycle4(), square_blocks({0, 10, 0}));
  CHECK(r.lmi_ok);
  CHECK(*r.qbar_lambda_min == doctest::Approx(oracle::sturm_lambda_min(build_qbar(kCa).matrix())).epsilon(1e-10));
  CHECK(r.overall);

  const ObserverGains m1{{2.0}, 15.9, 0.3, 0.1};
  const CertificationReport r1 = certify(m1, cycle4(), square_blocks({0, -15, 0}));
  CHECK_FALSE(r1.qbar_lambda_min.has_value());
  CHECK(r1.rate_bound == doctest::Approx(0.6));
  CHECK(r1.overall);
}

TEST_CASE("certify: failing conditions") {
  const std::vector<SymMatrix> same(4, projection_matrix({0, 0, 1}));
  const CertificationReport r = certify(kCv, cycle4(), same);
  CHECK(r.spatial_margin < 0.0);
  CHECK_FALSE(r.overall);
  CHECK(to_text(r).find("spatial_condition: FAIL") != std::string::npos);

  ObserverGains weak = kCv;
  weak.alpha = 4.0;
  CHECK_FALSE(certify(weak, cycle4(), square_blocks({0, -15, 0})).alpha_ok);

  const CommGraph split = CommGraph::from_edges(4, {{0, 1, 1.0}, {2, 3, 1.0}});
  const CertificationReport rs = certify(kCv, split, square_blocks({0, -15, 0}));
  CHECK_FALSE(rs.connected);
  CHECK_FALSE(rs.overall);
  CHECK(nlohmann::json::parse(to_json(rs)).at("alpha_bound").is_null());

  // An LMI-violating third-order design.
  const ObserverGains bad{{1.0, 5.0, 5.0}, 15.0, 0.3, 0.1};
  CHECK_FALSE(certify(bad, cycle4(), square_blocks({0, 10, 0})).lmi_ok);

  CHECK_THROWS_AS(certify(kCv, cycle4(), std::vector<SymMatrix>(3, SymMatrix::identity(3))),
                  ValidationError);
}

TEST_CASE("schur_pd_check") {
  CHECK(schur_pd_check(SymMatrix::identity(2), Matrix(2, 2), 2.0 * SymMatrix::identity(2), 1.0));
  const Vector half{0.5, 0.5};
  CHECK_FALSE(schur_pd_check(SymMatrix::diagonal(half), Matrix::identity(2), 2.0 * SymMatrix::identity(2), 1.0));
  CHECK_THROWS_AS(schur_pd_check(SymMatrix::identity(2), Matrix(2, 2), SymMatrix::identity(2), 1.0),
                  ValidationError);
}

TEST_CASE("schur_pd_check soundness: the conservative test implies the exact one") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.05, 2.0);
  int conservative_true = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t na = 1 + i % 4, nc = 1 + (i / 4) % 3;
    const double gamma = u(rng);
    const SymMatrix c = oracle::random_spd(nc, rng) + (gamma + 0.01) * SymMatrix::identity(nc);
    const SymMatrix a = oracle::random_spd(na, rng) + u(rng) * SymMatrix::identity(na);
    const Matrix b = oracle::random_matrix(na, nc, rng, 0.8);
    if (schur_pd_check(a, b, c, gamma)) {
      ++conservative_true;
      const Matrix exact = a.matrix() - b * oracle::gauss_inverse(c.matrix()) * b.transpose();
      CHECK(oracle::sturm_lambda_min(0.5 * (exact + exact.transpose())) > 0.0);
    }
  }
  CHECK(conservative_true > 100);
}

TEST_CASE("block decomposition of Phi behind the certificate") {
  // With V = [1/sqrt(N) 1, U], (V^T (x) I) Phi (V (x) I) splits into a mean
  // observation block, a coupling block and a consensus block. When the two
  // certified inequalities hold, the conservative Schur test passes and Phi
  // exceeds mu I.
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<int> coin(0, 3);
  int certified = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + trial % 5;
    const CommGraph g = CommGraph::build(oracle::random_connected_adjacency(n, rng));
    std::vector<SymMatrix> psi;
    for (std::size_t i = 0; i < n; ++i) {
      psi.push_back(coin(rng) == 0 && i > 0 ? SymMatrix::zero(3) : projection_matrix(oracle::random_unit(rng)));
    }
    ObserverGains gains = oracle::random_gains(1 + trial % 3, rng);
    gains.delta = 0.05;
    gains.gamma = 0.05;
    const double mu = compute_mu(gains);
    const double lam = lambda_min_positive(g);
    gains.alpha = consensus_alpha_bound(mu, gains.gamma, lam, psi) * 1.01;

    const Matrix big_psi = block_diag(psi);
    const Matrix phi = big_psi + gains.alpha * kron(g.laplacian().matrix(), Matrix::identity(3));
    Matrix v(n, n);
    v.set_block(0, 0, Matrix(n, 1, 1.0 / std::sqrt(static_cast<double>(n))));
    v.set_block(0, 1, g.u_matrix());
    const Matrix vk = kron(v, Matrix::identity(3));
    const Matrix bar = vk.transpose() * phi * vk;
    const Matrix b11 = bar.block(0, 0, 3, 3);
    const Matrix b12 = bar.block(0, 3, 3, 3 * (n - 1));
    const Matrix b22 = bar.block(3, 3, 3 * (n - 1), 3 * (n - 1));

    Matrix mean(3, 3);
    for (const SymMatrix& p : psi) mean += p.matrix();
    mean *= 1.0 / static_cast<double>(n);
    CHECK(max_abs_diff(b11, mean) < 1e-10);

    Matrix lam_block(n - 1, n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) lam_block(k, k) = g.lambda()[k];
    const Matrix ukron = kron(g.u_matrix(), Matrix::identity(3));
    CHECK(max_abs_diff(b22, ukron.transpose() * big_psi * ukron +
                                gains.alpha * kron(lam_block, Matrix::identity(3))) < 1e-9);

    if (mean_observation_lambda_min(psi) <= mu + gains.gamma) continue;
    ++certified;
    const SymMatrix c(b11 - mu * Matrix::identity(3));
    const SymMatrix a(b22 - mu * Matrix::identity(3 * (n - 1)));
    CHECK(schur_pd_check(a, b12.transpose(), c, gains.gamma));
    CHECK(oracle::sturm_lambda_min(phi) > mu);
  }
  CHECK(certified > 50);
}
