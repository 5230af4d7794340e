/*
 *  Copyright (C) 2026 The ctrack Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 *  See the file LICENSE for more information.
 */

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ctrack/gain_design.hpp"
#include "ctrack/graph.hpp"
#include "ctrack/numerics.hpp"

namespace ctrack {

inline constexpr std::size_t kSpaceDim = 3;

/// Agent position at time t (seconds), meters.
struct Waypoint {
  double t = 0.0;
  Vec3 position{};

  friend bool operator==(const Waypoint&, const Waypoint&) = default;
};

/// Unavailability interval [start, end) for an agent's bearing sensor.
struct LossInterval {
  double start = 0.0;
  double end = 0.0;

  friend bool operator==(const LossInterval&, const LossInterval&) = default;
};

/// Prescribed agent trajectory. A single waypoint means a static agent;
/// otherwise positions are interpolated linearly and held past both ends.
struct AgentTrack {
  std::vector<Waypoint> waypoints;
  std::vector<LossInterval> loss;

  Vec3 position_at(double t) const;
  bool measuring_at(double t) const;

  friend bool operator==(const AgentTrack&, const AgentTrack&) = default;
};

/// Piecewise-constant input on the top derivative of the target chain,
/// active from `start` until the next segment.
struct InputSegment {
  double start = 0.0;
  Vec3 u{};

  friend bool operator==(const InputSegment&, const InputSegment&) = default;
};

enum class InitMode {
  kPerAgent,  // p_hat_i = p_i + r_i b_i(t0)
  kAverage,   // every agent starts from the mean of the per-agent guesses
};

/// Full description of one experiment.
struct Scenario {
  std::vector<Vec3> target_initial;  // target chain order = size()
  std::vector<InputSegment> input;
  std::vector<AgentTrack> agents;
  std::vector<Edge> edges;
  ObserverGains gains;  // observer order = gains.k.size()
  double noise_std_deg = 0.0;
  double init_range_min = 5.0;
  double init_range_max = 30.0;
  InitMode init_mode = InitMode::kPerAgent;
  double step = 1e-3;
  double duration = 30.0;
  std::uint64_t seed = 1;
  std::size_t dkf_consensus_iters = 2;

  std::size_t n_agents() const noexcept { return agents.size(); }
  std::size_t target_order() const noexcept { return target_initial.size(); }
  std::size_t observer_order() const noexcept { return gains.order(); }
  std::size_t step_count() const;

  /// Throws ValidationError naming the offending field.
  void validate() const;
  CommGraph graph() const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

using InputFunction = std::function<Vec3(double)>;

InputFunction make_input_function(const std::vector<InputSegment>& segments);

/// Exact flow of the integrator chain: x^(m)(t) = sum_{r>=m} x^(r)(0) t^(r-m)/(r-m)!.
/// With an input, the chain is integrated with RK4 at step `h`.
std::vector<Vec3> propagate_truth(const std::vector<Vec3>& initial_blocks, double t,
                                  const InputFunction& u = nullptr, double h = 1e-3);

/// Rotation applied to a true bearing to model sensor noise.
struct BearingRotation {
  std::array<Vec3, 3> rows{Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};

  Vec3 apply(const Vec3& v) const;
};

/// Rotation by theta ~ N(0, angle_std) about an axis drawn uniformly on the
/// circle orthogonal to `true_bearing`. Identity when angle_std_deg == 0.
BearingRotation draw_bearing_rotation(const Vec3& true_bearing, double angle_std_deg,
                                      std::mt19937_64& rng);

/// Unit bearing from the agent to the target, corrupted by rotation noise.
/// Throws ValidationError when the two positions coincide.
Vec3 noisy_bearing(const Vec3& p_target, const Vec3& p_agent, double angle_std_deg,
                   std::mt19937_64& rng);

/// Exact bearing from the agent to the target.
Vec3 true_bearing(const Vec3& p_target, const Vec3& p_agent);

/// Noiseless observation matrices at time t (zero blocks for agents whose
/// sensor is unavailable).
std::vector<SymMatrix> observation_blocks_at(const Scenario& scenario, double t);

/// Certification of the scenario's gains at t0 = 0.
CertificationReport certify_scenario(const Scenario& scenario);

/// Precomputed V = 0.5 ||P x_err||^2 and its exponential envelope.
class LyapunovMonitor {
 public:
  LyapunovMonitor(const ObserverGains& gains, std::size_t block_dim);

  double value(std::span<const double> stacked_error) const;
  /// v0 exp(-rate (t - t0)) with rate 2 delta k1 (M = 1) or lambda_min(Qbar).
  double bound(double t, double t0, double v0) const;
  double decay_rate() const noexcept { return rate_; }
  const TransformationP& transformation() const noexcept { return p_; }

 private:
  TransformationP p_;
  double rate_ = 0.0;
};

/// Stacked error is ordered by derivative first, then by agent:
/// [x_err^(0)_1 .. x_err^(0)_N, x_err^(1)_1, ...].
std::pair<double, double> lyapunov_monitor(std::span<const double> stacked_error,
                                           const ObserverGains& gains, double t, double t0,
                                           double v0);

enum class Protocol {
  kConsensusObserver,  // first block only: K floats
  kInformationDkf,     // (Omega, q) per consensus round: (n^2 + n) floats
};

/// One broadcast made by an agent during one simulation step.
struct BroadcastEvent {
  std::size_t agent = 0;
  Protocol protocol = Protocol::kConsensusObserver;
  std::size_t dim = kSpaceDim;      // K for the observer, state dim for the DKF
  std::size_t consensus_iters = 1;  // DKF only
};

std::uint64_t floats_per_event(const BroadcastEvent& e);

/// Total floats broadcast by each agent over the given events.
std::vector<std::uint64_t> comm_accounting(std::span<const BroadcastEvent> events,
                                           std::size_t n_agents);

/// Time series recorded at t0 and after every integration step.
struct RunLog {
  std::size_t n_agents = 0;
  std::size_t order = 0;
  std::vector<double> t;
  /// error_norm[k][m * n_agents + i]: ||x^(m) - xhat_i^(m)|| at row k.
  std::vector<std::vector<double>> error_norm;
  std::vector<double> lyapunov;
  std::vector<double> lyapunov_bound;
  std::vector<double> spatial_lambda_min;
  std::vector<double> disagreement;
  /// Cumulative floats broadcast by each agent.
  std::vector<std::vector<std::uint64_t>> comm_floats;
  /// Measured bearing per agent at each row; `measuring` flags availability.
  std::vector<std::vector<Vec3>> bearings;
  std::vector<std::vector<bool>> measuring;
  std::uint64_t bearing_checksum = 0;
  std::vector<std::vector<Vec3>> final_estimates;  // [agent][block]

  std::size_t rows() const noexcept { return t.size(); }
  double position_error(std::size_t row, std::size_t agent) const {
    return error_norm[row][agent];
  }
  /// Rows where V exceeds its bound by more than `slack`.
  std::size_t envelope_violations(double slack) const;

  friend bool operator==(const RunLog&, const RunLog&) = default;
};

/// Integrates all coupled observers with RK4. Throws DivergenceError with
/// the failing time when a state component becomes non-finite or exceeds
/// 1e9 in magnitude.
RunLog run(const Scenario& scenario);

/// Header of the run CSV.
std::vector<std::string> run_csv_header(std::size_t n_agents, std::size_t order);
void write_run_csv(std::ostream& os, const RunLog& log);

/// Side-by-side observer / DKF comparison on one measurement stream.
struct CompareLog {
  std::size_t n_agents = 0;
  std::vector<double> t;
  std::vector<std::vector<double>> observer_error;  // [row][agent], position
  std::vector<std::vector<double>> dkf_error;       // [row][agent], position
  std::vector<std::uint64_t> observer_comm;         // cumulative per agent
  std::vector<std::uint64_t> dkf_comm;              // cumulative per agent
  std::uint64_t observer_checksum = 0;
  std::uint64_t dkf_checksum = 0;

  friend bool operator==(const CompareLog&, const CompareLog&) = default;
};

/// Runs the consensus observer and the information DKF on the same noisy
/// bearing stream. Both start from the averaged initial guess. Requires a
/// second-order observer.
CompareLog run_comparison(const Scenario& scenario);

std::vector<std::string> compare_csv_header(std::size_t n_agents);
void write_compare_csv(std::ostream& os, const CompareLog& log);

}  // namespace ctrack
