/*
 *  Copyright (C) 2026 The ctrack Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 *  See the file LICENSE for more information.
 */

#include "ctrack/sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "ctrack/constants.hpp"
#include "ctrack/dkf.hpp"
#include "ctrack/observer.hpp"

namespace ctrack {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

void fold(std::uint64_t& h, double v) {
  // FNV-1a over the bit pattern.
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) {
    h ^= (bits >> (8 * i)) & 0xffu;
    h *= 0x100000001b3ull;
  }
}

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;

}  // namespace

Vec3 AgentTrack::position_at(double t) const {
  if (waypoints.empty()) throw ValidationError("agent track has no waypoints");
  if (waypoints.size() == 1 || t <= waypoints.front().t) return waypoints.front().position;
  if (t >= waypoints.back().t) return waypoints.back().position;
  auto hi = std::upper_bound(waypoints.begin(), waypoints.end(), t,
                             [](double v, const Waypoint& w) { return v < w.t; });
  auto lo = hi - 1;
  const double s = (t - lo->t) / (hi->t - lo->t);
  return lo->position + s * (hi->position - lo->position);
}

bool AgentTrack::measuring_at(double t) const {
  return std::none_of(loss.begin(), loss.end(),
                      [t](const LossInterval& l) { return t >= l.start && t < l.end; });
}

std::size_t Scenario::step_count() const {
  return static_cast<std::size_t>(std::llround(duration / step));
}

void Scenario::validate() const {
  if (target_initial.empty()) throw ValidationError("target: order must be >= 1");
  for (const Vec3& b : target_initial)
    for (double v : b)
      if (!std::isfinite(v)) throw ValidationError("target: non-finite initial block");
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (i > 0 && !(input[i].start > input[i - 1].start)) {
      throw ValidationError("target: input segments must have increasing start times");
    }
  }
  if (agents.size() < 2) {
    throw ValidationError("agents: at least 2 agents are required, got " +
                          std::to_string(agents.size()));
  }
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const auto& wp = agents[i].waypoints;
    if (wp.empty()) throw ValidationError("agents: agent " + std::to_string(i) + " has no position");
    for (std::size_t k = 1; k < wp.size(); ++k) {
      if (!(wp[k].t > wp[k - 1].t)) {
        throw ValidationError("agents: agent " + std::to_string(i) +
                              " waypoints must have increasing times");
      }
    }
    for (const LossInterval& l : agents[i].loss) {
      if (!(l.end > l.start)) {
        throw ValidationError("agents: agent " + std::to_string(i) + " has an empty loss interval");
      }
    }
  }
  gains.validate();
  if (!(noise_std_deg >= 0.0)) throw ValidationError("noise: bearing_std_deg must be >= 0");
  if (!(init_range_min > 0.0) || init_range_max < init_range_min) {
    throw ValidationError("agents: init_range must satisfy 0 < min <= max");
  }
  if (!(step > 0.0)) throw ValidationError("sim: step must be positive");
  if (!(duration >= step)) throw ValidationError("sim: duration must be at least one step");
  if (dkf_consensus_iters < 1) throw ValidationError("sim: dkf_consensus_iters must be >= 1");
  (void)graph();
}

CommGraph Scenario::graph() const { return CommGraph::from_edges(agents.size(), edges); }

InputFunction make_input_function(const std::vector<InputSegment>& segments) {
  if (segments.empty()) return nullptr;
  return [segments](double t) {
    Vec3 u{};
    for (const InputSegment& s : segments) {
      if (t >= s.start) u = s.u;
    }
    return u;
  };
}

std::vector<Vec3> propagate_truth(const std::vector<Vec3>& initial_blocks, double t,
                                  const InputFunction& u, double h) {
  if (t < 0.0) throw ValidationError("propagate_truth: t must be >= 0");
  const std::size_t m = initial_blocks.size();
  if (!u) {
    std::vector<Vec3> out(m, Vec3{});
    for (std::size_t b = 0; b < m; ++b) {
      double coeff = 1.0;  // t^(r-b) / (r-b)!
      for (std::size_t r = b; r < m; ++r) {
        if (r > b) coeff *= t / static_cast<double>(r - b);
        out[b] = out[b] + coeff * initial_blocks[r];
      }
    }
    return out;
  }

  Vector x(m * kSpaceDim);
  for (std::size_t b = 0; b < m; ++b)
    for (std::size_t d = 0; d < kSpaceDim; ++d) x[b * kSpaceDim + d] = initial_blocks[b][d];
  auto f = [&](double ts, const Vector& s) {
    Vector ds(s.size(), 0.0);
    for (std::size_t b = 0; b + 1 < m; ++b)
      for (std::size_t d = 0; d < kSpaceDim; ++d)
        ds[b * kSpaceDim + d] = s[(b + 1) * kSpaceDim + d];
    const Vec3 in = u(ts);
    for (std::size_t d = 0; d < kSpaceDim; ++d) ds[(m - 1) * kSpaceDim + d] = in[d];
    return ds;
  };
  double ts = 0.0;
  while (ts < t) {
    const double step = std::min(h, t - ts);
    if (step <= 0.0) break;
    x = rk4_step(f, ts, x, step);
    ts += step;
  }
  std::vector<Vec3> out(m);
  for (std::size_t b = 0; b < m; ++b)
    for (std::size_t d = 0; d < kSpaceDim; ++d) out[b][d] = x[b * kSpaceDim + d];
  return out;
}

Vec3 BearingRotation::apply(const Vec3& v) const {
  return {dot(rows[0], v), dot(rows[1], v), dot(rows[2], v)};
}

Vec3 true_bearing(const Vec3& p_target, const Vec3& p_agent) {
  const Vec3 d = p_target - p_agent;
  if (!(norm(d) > 0.0)) {
    throw ValidationError("bearing undefined: agent and target positions coincide");
  }
  return normalized(d);
}

BearingRotation draw_bearing_rotation(const Vec3& b, double angle_std_deg, std::mt19937_64& rng) {
  BearingRotation r;
  if (angle_std_deg == 0.0) return r;
  std::normal_distribution<double> angle(0.0, angle_std_deg * kDegToRad);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  const double theta = angle(rng);
  const double phi = phase(rng);

  // Orthonormal pair spanning the plane orthogonal to b.
  std::size_t smallest = 0;
  for (std::size_t i = 1; i < 3; ++i)
    if (std::abs(b[i]) < std::abs(b[smallest])) smallest = i;
  Vec3 helper{};
  helper[smallest] = 1.0;
  const Vec3 e1 = normalized(cross(b, helper));
  const Vec3 e2 = cross(b, e1);
  const Vec3 a = std::cos(phi) * e1 + std::sin(phi) * e2;

  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double one_c = 1.0 - c;
  r.rows[0] = {c + one_c * a[0] * a[0], one_c * a[0] * a[1] - s * a[2], one_c * a[0] * a[2] + s * a[1]};
  r.rows[1] = {one_c * a[1] * a[0] + s * a[2], c + one_c * a[1] * a[1], one_c * a[1] * a[2] - s * a[0]};
  r.rows[2] = {one_c * a[2] * a[0] - s * a[1], one_c * a[2] * a[1] + s * a[0], c + one_c * a[2] * a[2]};
  return r;
}

Vec3 noisy_bearing(const Vec3& p_target, const Vec3& p_agent, double angle_std_deg,
                   std::mt19937_64& rng) {
  const Vec3 b = true_bearing(p_target, p_agent);
  return normalized(draw_bearing_rotation(b, angle_std_deg, rng).apply(b));
}

std::vector<SymMatrix> observation_blocks_at(const Scenario& scenario, double t) {
  const Vec3 target = propagate_truth(scenario.target_initial, t,
                                      make_input_function(scenario.input), scenario.step)[0];
  std::vector<SymMatrix> blocks;
  blocks.reserve(scenario.n_agents());
  for (const AgentTrack& a : scenario.agents) {
    if (a.measuring_at(t)) {
      blocks.push_back(projection_matrix(true_bearing(target, a.position_at(t))));
    } else {
      blocks.push_back(SymMatrix::zero(kSpaceDim));
    }
  }
  return blocks;
}

CertificationReport certify_scenario(const Scenario& scenario) {
  scenario.validate();
  const auto blocks = observation_blocks_at(scenario, 0.0);
  return certify(scenario.gains, scenario.graph(), blocks);
}

LyapunovMonitor::LyapunovMonitor(const ObserverGains& gains, std::size_t block_dim)
    : p_(build_transformation(gains, block_dim)) {
  if (gains.order() == 1) {
    rate_ = 2.0 * gains.delta * gains.k[0];
  } else {
    rate_ = lambda_min(build_qbar(gains));
  }
}

double LyapunovMonitor::value(std::span<const double> stacked_error) const {
  if (stacked_error.size() != p_.p.cols()) {
    throw ValidationError("lyapunov_monitor: stacked error has the wrong size");
  }
  const Vector eta = p_.apply(stacked_error);
  return 0.5 * dot(eta, eta);
}

double LyapunovMonitor::bound(double t, double t0, double v0) const {
  return v0 * std::exp(-rate_ * (t - t0));
}

std::pair<double, double> lyapunov_monitor(std::span<const double> stacked_error,
                                           const ObserverGains& gains, double t, double t0,
                                           double v0) {
  const std::size_t m = gains.order();
  if (m == 0 || stacked_error.size() % m != 0) {
    throw ValidationError("lyapunov_monitor: stacked error size is not a multiple of the order");
  }
  const LyapunovMonitor mon(gains, stacked_error.size() / m);
  return {mon.value(stacked_error), mon.bound(t, t0, v0)};
}

std::uint64_t floats_per_event(const BroadcastEvent& e) {
  switch (e.protocol) {
    case Protocol::kConsensusObserver:
      return e.dim;
    case Protocol::kInformationDkf:
      return static_cast<std::uint64_t>(e.dim * e.dim + e.dim) * e.consensus_iters;
  }
  return 0;
}

std::vector<std::uint64_t> comm_accounting(std::span<const BroadcastEvent> events,
                                           std::size_t n_agents) {
  std::vector<std::uint64_t> out(n_agents, 0);
  for (const BroadcastEvent& e : events) {
    if (e.agent >= n_agents) throw ValidationError("comm_accounting: agent index out of range");
    out[e.agent] += floats_per_event(e);
  }
  return out;
}

std::size_t RunLog::envelope_violations(double slack) const {
  std::size_t n = 0;
  for (std::size_t k = 0; k < lyapunov.size(); ++k)
    if (lyapunov[k] > lyapunov_bound[k] + slack) ++n;
  return n;
}

namespace {

// Per-step sensor state: which agents measure and the noise rotation held
// over the step.
struct StepSensors {
  std::vector<bool> measuring;
  std::vector<BearingRotation> rotation;
};

// Coupled truth + observer network. State layout:
// [truth blocks (target order x 3) | agent 0 blocks | agent 1 blocks | ...].
class Network {
 public:
  explicit Network(const Scenario& s)
      : s_(s),
        graph_(s.graph()),
        input_(make_input_function(s.input)),
        n_(s.n_agents()),
        m_(s.observer_order()),
        tm_(s.target_order()) {
    for (std::size_t i = 0; i < n_; ++i) {
      std::vector<NeighborLink> links;
      for (std::size_t j : graph_.neighbors(i)) links.push_back({j, graph_.weight(i, j)});
      neighbors_.push_back(std::move(links));
    }
  }

  std::size_t n() const { return n_; }
  std::size_t order() const { return m_; }
  const CommGraph& graph() const { return graph_; }
  std::size_t truth_size() const { return tm_ * kSpaceDim; }
  std::size_t agent_offset(std::size_t i) const { return truth_size() + i * m_ * kSpaceDim; }
  std::size_t state_size() const { return agent_offset(n_); }

  Vec3 truth_block(const Vector& x, std::size_t m) const {
    if (m >= tm_) return Vec3{};
    return {x[m * kSpaceDim], x[m * kSpaceDim + 1], x[m * kSpaceDim + 2]};
  }
  Vec3 estimate_block(const Vector& x, std::size_t i, std::size_t m) const {
    const std::size_t o = agent_offset(i) + m * kSpaceDim;
    return {x[o], x[o + 1], x[o + 2]};
  }

  // Sensor state for the step starting at t; draws noise in agent order.
  StepSensors sensors_at(double t, const Vector& x, std::mt19937_64& rng) const {
    StepSensors s;
    s.measuring.resize(n_);
    s.rotation.resize(n_);
    const Vec3 target = truth_block(x, 0);
    for (std::size_t i = 0; i < n_; ++i) {
      s.measuring[i] = s_.agents[i].measuring_at(t);
      if (s.measuring[i]) {
        const Vec3 b = true_bearing(target, s_.agents[i].position_at(t));
        s.rotation[i] = draw_bearing_rotation(b, s_.noise_std_deg, rng);
      }
    }
    return s;
  }

  Vec3 measured_bearing(double t, const Vector& x, std::size_t i, const StepSensors& s) const {
    const Vec3 b = true_bearing(truth_block(x, 0), s_.agents[i].position_at(t));
    return normalized(s.rotation[i].apply(b));
  }

  Measurement measurement(double t, const Vector& x, std::size_t i, const StepSensors& s) const {
    if (!s.measuring[i]) return Measurement::unavailable(i, kSpaceDim);
    return bearing_measurement(i, s_.agents[i].position_at(t), measured_bearing(t, x, i, s));
  }

  Vector derivative(double t, const Vector& x, const StepSensors& sensors) const {
    Vector dx(x.size(), 0.0);
    for (std::size_t b = 0; b + 1 < tm_; ++b)
      for (std::size_t d = 0; d < kSpaceDim; ++d)
        dx[b * kSpaceDim + d] = x[(b + 1) * kSpaceDim + d];
    if (input_) {
      const Vec3 u = input_(t);
      for (std::size_t d = 0; d < kSpaceDim; ++d) dx[(tm_ - 1) * kSpaceDim + d] = u[d];
    }

    for (std::size_t i = 0; i < n_; ++i) {
      const AgentState state = agent_state(x, i);
      const Measurement meas = measurement(t, x, i, sensors);
      std::vector<NeighborEstimate> nb;
      nb.reserve(neighbors_[i].size());
      for (const NeighborLink& l : neighbors_[i]) {
        const Vec3 p = estimate_block(x, l.agent, 0);
        nb.push_back({l.agent, l.weight, Vector(p.begin(), p.end())});
      }
      const Vector delta = correction_term(state, meas, nb, s_.gains.alpha);
      const AgentState d = observer_derivative(state, delta, s_.gains);
      const std::size_t o = agent_offset(i);
      for (std::size_t b = 0; b < m_; ++b)
        for (std::size_t k = 0; k < kSpaceDim; ++k) dx[o + b * kSpaceDim + k] = d.blocks[b][k];
    }
    return dx;
  }

  AgentState agent_state(const Vector& x, std::size_t i) const {
    AgentState st{i, std::vector<Vector>(m_, Vector(kSpaceDim))};
    const std::size_t o = agent_offset(i);
    for (std::size_t b = 0; b < m_; ++b)
      for (std::size_t k = 0; k < kSpaceDim; ++k) st.blocks[b][k] = x[o + b * kSpaceDim + k];
    return st;
  }

  // Initial truth and observer estimates; consumes range and bearing draws.
  Vector initial_state(std::mt19937_64& rng) const {
    Vector x(state_size(), 0.0);
    for (std::size_t b = 0; b < tm_; ++b)
      for (std::size_t d = 0; d < kSpaceDim; ++d)
        x[b * kSpaceDim + d] = s_.target_initial[b][d];

    const Vec3 target = s_.target_initial[0];
    std::uniform_real_distribution<double> range(s_.init_range_min, s_.init_range_max);
    std::vector<Vec3> guess(n_);
    std::vector<bool> informed(n_, false);
    for (std::size_t i = 0; i < n_; ++i) {
      const double r = range(rng);
      const Vec3 p = s_.agents[i].position_at(0.0);
      if (s_.agents[i].measuring_at(0.0)) {
        guess[i] = p + r * noisy_bearing(target, p, s_.noise_std_deg, rng);
        informed[i] = true;
      } else {
        guess[i] = p;
      }
    }
    if (s_.init_mode == InitMode::kAverage) {
      Vec3 mean{};
      std::size_t cnt = 0;
      for (std::size_t i = 0; i < n_; ++i)
        if (informed[i]) {
          mean = mean + guess[i];
          ++cnt;
        }
      if (cnt > 0) {
        mean = (1.0 / static_cast<double>(cnt)) * mean;
        std::fill(guess.begin(), guess.end(), mean);
      }
    }
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t d = 0; d < kSpaceDim; ++d) x[agent_offset(i) + d] = guess[i][d];
    return x;
  }

  // Error stacked by derivative order first, then agent.
  Vector stacked_error(const Vector& x) const {
    Vector e(m_ * n_ * kSpaceDim);
    for (std::size_t b = 0; b < m_; ++b) {
      const Vec3 truth = truth_block(x, b);
      for (std::size_t i = 0; i < n_; ++i) {
        const Vec3 est = estimate_block(x, i, b);
        for (std::size_t d = 0; d < kSpaceDim; ++d)
          e[(b * n_ + i) * kSpaceDim + d] = truth[d] - est[d];
      }
    }
    return e;
  }

  double disagreement(const Vector& x) const {
    double worst = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j)
        worst = std::max(worst, norm(estimate_block(x, i, 0) - estimate_block(x, j, 0)));
    return worst;
  }

  void check_finite(const Vector& x, double t) const {
    for (double v : x) {
      if (!std::isfinite(v) || std::abs(v) > tol::kDivergence) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "simulation diverged at t=%.6f s", t);
        throw DivergenceError(buf, t);
      }
    }
  }

  Vector advance(double t, const Vector& x, const StepSensors& sensors) const {
    try {
      Vector next = rk4_step(
          [&](double ts, const Vector& xs) { return derivative(ts, xs, sensors); }, t, x, s_.step);
      check_finite(next, t + s_.step);
      return next;
    } catch (const IntegrationError& e) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "simulation diverged at t=%.6f s", e.time());
      throw DivergenceError(buf, e.time());
    }
  }

 private:
  struct NeighborLink {
    std::size_t agent;
    double weight;
  };

  const Scenario& s_;
  CommGraph graph_;
  InputFunction input_;
  std::size_t n_;
  std::size_t m_;
  std::size_t tm_;
  std::vector<std::vector<NeighborLink>> neighbors_;
};

}  // namespace

RunLog run(const Scenario& scenario) {
  scenario.validate();
  const Network net(scenario);
  const std::size_t n = net.n();
  const std::size_t m = net.order();
  const std::size_t steps = scenario.step_count();
  const LyapunovMonitor monitor(scenario.gains, n * kSpaceDim);

  std::mt19937_64 rng(scenario.seed);
  Vector x = net.initial_state(rng);

  RunLog log;
  log.n_agents = n;
  log.order = m;
  log.bearing_checksum = kFnvOffset;
  double v0 = 0.0;
  std::vector<std::uint64_t> comm(n, 0);
  const BroadcastEvent per_step{0, Protocol::kConsensusObserver, kSpaceDim, 1};

  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * scenario.step;
    const StepSensors sensors = net.sensors_at(t, x, rng);

    log.t.push_back(t);
    const Vector err = net.stacked_error(x);
    std::vector<double> norms(m * n);
    for (std::size_t b = 0; b < m; ++b)
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t o = (b * n + i) * kSpaceDim;
        norms[b * n + i] = std::sqrt(err[o] * err[o] + err[o + 1] * err[o + 1] + err[o + 2] * err[o + 2]);
      }
    log.error_norm.push_back(std::move(norms));

    const double v = monitor.value(err);
    if (k == 0) v0 = v;
    log.lyapunov.push_back(v);
    log.lyapunov_bound.push_back(monitor.bound(t, 0.0, v0));

    std::vector<Vec3> bearings(n, Vec3{});
    Matrix mean(kSpaceDim, kSpaceDim);
    for (std::size_t i = 0; i < n; ++i) {
      if (!sensors.measuring[i]) continue;
      bearings[i] = net.measured_bearing(t, x, i, sensors);
      for (double c : bearings[i]) fold(log.bearing_checksum, c);
      mean += projection_matrix(bearings[i]).matrix();
    }
    mean *= 1.0 / static_cast<double>(n);
    log.spatial_lambda_min.push_back(lambda_min(SymMatrix(mean)));
    log.bearings.push_back(std::move(bearings));
    log.measuring.push_back(sensors.measuring);
    log.disagreement.push_back(net.disagreement(x));
    log.comm_floats.push_back(comm);

    if (k == steps) break;
    x = net.advance(t, x, sensors);
    for (std::size_t i = 0; i < n; ++i) comm[i] += floats_per_event(per_step);
  }

  log.final_estimates.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t b = 0; b < m; ++b) log.final_estimates[i].push_back(net.estimate_block(x, i, b));
  return log;
}

CompareLog run_comparison(const Scenario& scenario) {
  scenario.validate();
  if (scenario.observer_order() != 2) {
    throw ValidationError(
        "compare: the DKF baseline is a constant-velocity filter, so the observer must have "
        "order M = 2 (got M = " +
        std::to_string(scenario.observer_order()) + ")");
  }
  Scenario s = scenario;
  s.init_mode = InitMode::kAverage;
  const Network net(s);
  const std::size_t n = net.n();
  const std::size_t steps = s.step_count();

  std::mt19937_64 rng(s.seed);
  Vector x = net.initial_state(rng);

  // The DKF starts from the same averaged guess with zero velocity.
  std::vector<InformationPair> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 p = net.estimate_block(x, i, 0);
    const Vector x0{p[0], p[1], p[2], 0.0, 0.0, 0.0};
    pairs.push_back(make_information_pair(SymMatrix::identity(kDkfStateDim), x0));
  }

  CompareLog log;
  log.n_agents = n;
  log.observer_checksum = kFnvOffset;
  log.dkf_checksum = kFnvOffset;
  const BroadcastEvent obs_event{0, Protocol::kConsensusObserver, kSpaceDim, 1};
  const BroadcastEvent dkf_event{0, Protocol::kInformationDkf, kDkfStateDim, s.dkf_consensus_iters};
  std::uint64_t obs_comm = 0;
  std::uint64_t dkf_comm = 0;

  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * s.step;
    const StepSensors sensors = net.sensors_at(t, x, rng);
    const Vec3 target = net.truth_block(x, 0);

    // Observer side: the bearings it integrates from at the start of the step.
    std::vector<Measurement> meas(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (sensors.measuring[i]) {
        for (double c : net.measured_bearing(t, x, i, sensors)) fold(log.observer_checksum, c);
      }
    }
    // DKF side: its own pseudo-measurements for the same instant.
    for (std::size_t i = 0; i < n; ++i) {
      meas[i] = net.measurement(t, x, i, sensors);
      if (sensors.measuring[i]) {
        for (double c : net.measured_bearing(t, x, i, sensors)) fold(log.dkf_checksum, c);
      }
    }
    DkfStepResult dkf = dkf_step(pairs, meas, s.dkf_consensus_iters, net.graph(), s.step);
    pairs = std::move(dkf.pairs);
    dkf_comm += floats_per_event(dkf_event);

    log.t.push_back(t);
    std::vector<double> oe(n);
    std::vector<double> de(n);
    for (std::size_t i = 0; i < n; ++i) {
      oe[i] = norm(target - net.estimate_block(x, i, 0));
      const Vector& e = dkf.estimates[i];
      de[i] = norm(target - Vec3{e[0], e[1], e[2]});
    }
    log.observer_error.push_back(std::move(oe));
    log.dkf_error.push_back(std::move(de));
    log.observer_comm.push_back(obs_comm);
    log.dkf_comm.push_back(dkf_comm);

    if (k == steps) break;
    x = net.advance(t, x, sensors);
    obs_comm += floats_per_event(obs_event);
  }
  return log;
}

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_row(std::ostream& os, const std::vector<std::string>& cells) {
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (c) os << ',';
    os << cells[c];
  }
  os << '\n';
}

const char* block_name(std::size_t m) {
  switch (m) {
    case 0: return "pos";
    case 1: return "vel";
    case 2: return "acc";
    default: return nullptr;
  }
}

}  // namespace

std::vector<std::string> run_csv_header(std::size_t n_agents, std::size_t order) {
  std::vector<std::string> h{"t"};
  for (std::size_t m = 0; m < order; ++m) {
    const char* name = block_name(m);
    const std::string base = name ? std::string("err_") + name : "err_d" + std::to_string(m);
    for (std::size_t i = 1; i <= n_agents; ++i) h.push_back(base + "_agent" + std::to_string(i));
  }
  for (const char* c : {"V", "V_bound", "lambda_min_spatial", "disagreement", "comm_floats"}) {
    h.emplace_back(c);
  }
  return h;
}

void write_run_csv(std::ostream& os, const RunLog& log) {
  write_row(os, run_csv_header(log.n_agents, log.order));
  for (std::size_t k = 0; k < log.rows(); ++k) {
    std::vector<std::string> cells{fmt_double(log.t[k])};
    for (double e : log.error_norm[k]) cells.push_back(fmt_double(e));
    cells.push_back(fmt_double(log.lyapunov[k]));
    cells.push_back(fmt_double(log.lyapunov_bound[k]));
    cells.push_back(fmt_double(log.spatial_lambda_min[k]));
    cells.push_back(fmt_double(log.disagreement[k]));
    cells.push_back(std::to_string(log.comm_floats[k].empty() ? 0 : log.comm_floats[k][0]));
    write_row(os, cells);
  }
}

std::vector<std::string> compare_csv_header(std::size_t n_agents) {
  std::vector<std::string> h{"t"};
  for (std::size_t i = 1; i <= n_agents; ++i) h.push_back("obs_err_pos_agent" + std::to_string(i));
  for (std::size_t i = 1; i <= n_agents; ++i) h.push_back("dkf_err_pos_agent" + std::to_string(i));
  h.emplace_back("obs_comm_floats");
  h.emplace_back("dkf_comm_floats");
  return h;
}

void write_compare_csv(std::ostream& os, const CompareLog& log) {
  write_row(os, compare_csv_header(log.n_agents));
  for (std::size_t k = 0; k < log.t.size(); ++k) {
    std::vector<std::string> cells{fmt_double(log.t[k])};
    for (double e : log.observer_error[k]) cells.push_back(fmt_double(e));
    for (double e : log.dkf_error[k]) cells.push_back(fmt_double(e));
    cells.push_back(std::to_string(log.observer_comm[k]));
    cells.push_back(std::to_string(log.dkf_comm[k]));
    write_row(os, cells);
  }
}

}  // namespace ctrack
