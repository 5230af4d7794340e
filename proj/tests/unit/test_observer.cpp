/*
 *  Copyright (C) 2026 The ctrack Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 *  See the file LICENSE for more information.
 */

#include <random>

#include "ctrack/gain_design.hpp"
#include "ctrack/observer.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace ctrack;

namespace {

AgentState state_of(std::size_t agent, std::vector<Vector> blocks) { return {agent, std::move(blocks)}; }

void check_vec(const Vector& a, const Vector& b, double tol = 1e-12) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= tol);
}

}  // namespace

TEST_CASE("correction_term") {
  const Vec3 target{1.0, 2.0, 3.0};
  const Vec3 pos{-4.0, 0.5, 2.0};
  const Measurement m = bearing_measurement(0, pos, normalized(target - pos));
  const AgentState exact = state_of(0, {Vector(target.begin(), target.end())});
  const std::vector<NeighborEstimate> same{{1, 1.0, Vector(target.begin(), target.end())},
                                           {2, 0.5, Vector(target.begin(), target.end())}};
  check_vec(correction_term(exact, m, same, 3.0), {0, 0, 0}, 1e-12);

  // No neighbours: Pi_b (p_i - phat).
  const AgentState off = state_of(0, {{0.0, 0.0, 0.0}});
  const Vector d = correction_term(off, m, {}, 3.0);
  check_vec(d, m.psi.matrix() * Vector(pos.begin(), pos.end()));

  // Pure consensus when the sensor is unavailable.
  const std::vector<NeighborEstimate> two{{1, 1.0, {1.0, 2.0, 3.0}}, {2, 1.0, {-1.0, 0.5, 4.0}}};
  check_vec(correction_term(off, Measurement::unavailable(0, 3), two, 2.0), {0.0, 5.0, 14.0});
}

TEST_CASE("correction_term: weight and gain scaling cancel") {
  std::mt19937_64 rng(2);
  const AgentState s = state_of(0, {{0.3, -1.0, 2.0}});
  const Measurement m = bearing_measurement(0, {1, 2, 3}, oracle::random_unit(rng));
  std::vector<NeighborEstimate> nb{{1, 0.7, {1.0, 1.0, 1.0}}, {2, 1.9, {-2.0, 0.0, 0.5}}};
  const Vector base = correction_term(s, m, nb, 4.0);
  for (auto& n : nb) n.weight *= 3.0;
  check_vec(correction_term(s, m, nb, 4.0 / 3.0), base, 1e-12);
}

TEST_CASE("observer_derivative") {
  const ObserverGains g2{{5.0, 3.5}, 1.0, 1.0, 1.0};
  const AgentState s2 = state_of(0, {{1, 2, 3}, {4, 5, 6}});
  const AgentState d2 = observer_derivative(s2, Vector{0, 0, 0}, g2);
  check_vec(d2.blocks[0], {4, 5, 6});
  check_vec(d2.blocks[1], {0, 0, 0});

  const ObserverGains g1{{2.0}, 1.0, 1.0, 1.0};
  check_vec(observer_derivative(state_of(0, {{9, 9, 9}}), Vector{1, -1, 0.5}, g1).blocks[0], {2, -2, 1});

  const ObserverGains g3{{10.0, 3.7, 0.5}, 1.0, 1.0, 1.0};
  const AgentState s3 = state_of(0, {{7, 7, 7}, {0, 0, 0}, {0, 0, 0}});
  const AgentState d3 = observer_derivative(s3, Vector{1, 0, 0}, g3);
  check_vec(d3.blocks[0], {10, 0, 0});
  check_vec(d3.blocks[1], {3.7, 0, 0});
  check_vec(d3.blocks[2], {0.5, 0, 0});

  CHECK_THROWS_AS(observer_derivative(s3, Vector{1, 0, 0}, g2), ValidationError);
}

TEST_CASE("bearing_measurement") {
  std::mt19937_64 rng(3);
  const Measurement at_origin = bearing_measurement(0, {0, 0, 0}, oracle::random_unit(rng));
  check_vec(at_origin.y, {0, 0, 0});

  const Measurement axis = bearing_measurement(1, {1, 0, 0}, {0, 0, 1});
  const Vector diag{1, 1, 0};
  CHECK(max_abs_diff(axis.psi.matrix(), Matrix::diagonal(diag)) == 0.0);
  check_vec(axis.y, {1, 0, 0});
  CHECK(axis.available);

  for (int i = 0; i < 100; ++i) {
    const Vec3 pt = 20.0 * oracle::random_unit(rng);
    const Vec3 pa = 5.0 * oracle::random_unit(rng);
    const Measurement m = bearing_measurement(0, pa, normalized(pt - pa));
    const Vector r = m.psi.matrix() * Vector(pt.begin(), pt.end());
    for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(m.y[k] - r[k]) <= 1e-9);
  }
  CHECK_THROWS_AS(bearing_measurement(0, {0, 0, 0}, {1, 1, 0}), ValidationError);

  const Measurement none = Measurement::unavailable(2, 3);
  CHECK_FALSE(none.available);
  CHECK(none.psi.matrix().max_abs() == 0.0);
  check_vec(none.y, {0, 0, 0});
}

TEST_CASE("broadcast_payload") {
  const AgentState s = state_of(4, {{1, 2, 3}, {4, 5, 6}, {7, 8, 9}});
  check_vec(broadcast_payload(s), {1, 2, 3});
  CHECK(payload_size(s) == 3);
  const NeighborEstimate received{4, 1.0, broadcast_payload(s)};
  CHECK(received.position == s.blocks[0]);
}

TEST_CASE("stacked observer derivatives follow the error dynamics matrix") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + trial % 3, m = 1 + trial % 3, k = 1 + (trial / 3) % 3;
    const CommGraph g = CommGraph::build(oracle::random_connected_adjacency(n, rng));
    ObserverGains gains = oracle::random_gains(m, rng);

    std::vector<Vector> truth(m, Vector(k));
    for (auto& b : truth)
      for (double& x : b) x = u(rng);
    std::vector<AgentState> est(n);
    std::vector<Measurement> meas(n);
    std::vector<SymMatrix> psi(n);
    for (std::size_t i = 0; i < n; ++i) {
      est[i] = state_of(i, std::vector<Vector>(m, Vector(k)));
      for (auto& b : est[i].blocks)
        for (double& x : b) x = u(rng);
      psi[i] = trial % 5 == 0 && i == 0 ? SymMatrix::zero(k) : oracle::random_spd(k, rng, 0.0);
      meas[i] = {i, !(trial % 5 == 0 && i == 0), psi[i], psi[i].matrix() * truth[0]};
    }

    // Error derivative, stacked by block then agent.
    Vector err(m * n * k), derr(m * n * k);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<NeighborEstimate> nb;
      for (std::size_t j : g.neighbors(i)) nb.push_back({j, g.weight(i, j), est[j].blocks[0]});
      const Vector delta = correction_term(est[i], meas[i], nb, gains.alpha);
      const AgentState d = observer_derivative(est[i], delta, gains);
      for (std::size_t b = 0; b < m; ++b) {
        for (std::size_t c = 0; c < k; ++c) {
          const double truth_rate = b + 1 < m ? truth[b + 1][c] : 0.0;
          err[(b * n + i) * k + c] = truth[b][c] - est[i].blocks[b][c];
          derr[(b * n + i) * k + c] = truth_rate - d.blocks[b][c];
        }
      }
    }

    Matrix big_psi(n * k, n * k);
    for (std::size_t i = 0; i < n; ++i) big_psi.set_block(i * k, i * k, psi[i].matrix());
    const SymMatrix phi(big_psi + gains.alpha * kron(g.laplacian().matrix(), Matrix::identity(k)));
    const Vector pred = build_xi(gains, phi) * err;
    for (std::size_t i = 0; i < pred.size(); ++i) worst = std::max(worst, std::abs(pred[i] - derr[i]));
  }
  CHECK(worst <= 1e-9);
}
