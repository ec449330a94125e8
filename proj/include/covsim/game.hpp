#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "covsim/constellation.hpp"
#include "covsim/orbit.hpp"
#include "covsim/potential.hpp"
#include "covsim/quadrature.hpp"

namespace covsim {

enum class RegionClass { leading, trailing, outside };

// Direction of steepest change of a satellite's deviation angle with respect
// to its relative position; the gradient of atan2 about the circle center.
inline Vec2 angle_gradient(const Vec2& p, const OrbitParams& orbit) {
  const double ax = p(0) + orbit.orbit_radius;
  const double ay = p(1);
  const double d = ax * ax + ay * ay;
  if (!(d > 0.0))
    throw std::domain_error("angle gradient undefined at the circle center");
  return Vec2(-ay / d, ax / d);
}

/**
 * @brief Gradient of the triangular intensity with respect to the satellite's
 * position, constant on each half of the footprint.
 */
inline Vec2 intensity_gradient(const SatelliteSpec& spec, const Vec2& p,
                               RegionClass region, const OrbitParams& orbit) {
  if (region == RegionClass::outside) return Vec2::Zero();
  const Vec2 g = spec.slope() * angle_gradient(p, orbit);
  return region == RegionClass::leading ? g : Vec2(-g);
}

namespace detail {

// Forward/backward half-footprint integrals of the aggregate intensity around
// satellite `self`.
inline std::pair<double, double> half_footprint_integrals(
    const std::vector<CoverageProfile>& profiles, const CoverageProfile& self) {
  const double fwd = linear_density_integral(profiles, self.leading());
  const double bwd = linear_density_integral(profiles, self.trailing());
  return {fwd, bwd};
}

// Profiles of satellite i and its ring neighbors only.
inline std::vector<CoverageProfile> adjacent_profiles(std::size_t i,
                                                      const Configuration& config,
                                                      const OrbitParams& orbit) {
  std::vector<CoverageProfile> out = {config.profile(i, orbit)};
  if (config.alive_count() > 1) {
    const std::size_t prev = config.prev_alive(i);
    const std::size_t next = config.next_alive(i);
    out.push_back(config.profile(prev, orbit));
    if (next != prev) out.push_back(config.profile(next, orbit));
  }
  return out;
}

}  // namespace detail

/**
 * @brief Gradient of the ring cost with respect to satellite i's position.
 *
 * Only the satellite's own footprint integrals enter, so the value is exact
 * (no quadrature) and needs data from the ring neighbors alone; the demand
 * never appears because its period average is position-independent.
 */
inline Vec2 potential_gradient(std::size_t i, const Configuration& config,
                               const OrbitParams& orbit) {
  if (i >= config.size()) throw std::out_of_range("potential_gradient: index out of range");
  if (!config.specs[i].alive)
    throw std::invalid_argument("potential_gradient: satellite " +
                                std::to_string(config.specs[i].id) + " is not alive");
  const auto local = detail::adjacent_profiles(i, config, orbit);
  const auto [fwd, bwd] = detail::half_footprint_integrals(local, local[0]);
  return config.specs[i].slope() * (fwd - bwd) *
         angle_gradient(config.positions[i], orbit);
}

/**
 * @brief Normalized front/back coverage imbalance of satellite i; zero at a
 * stationary interior point.
 */
inline double stationarity_residual(std::size_t i, const Configuration& config,
                                    const OrbitParams& orbit) {
  const auto local = detail::adjacent_profiles(i, config, orbit);
  const auto [fwd, bwd] = detail::half_footprint_integrals(local, local[0]);
  const double sum = fwd + bwd;
  return sum > 0.0 ? std::abs(fwd - bwd) / sum : 0.0;
}

/**
 * @brief Nearest feasible position: radial projection onto the orbit circle,
 * then the arc angle clamped to the displacement bound.
 */
inline Vec2 project_feasible(const Vec2& p_raw, const OrbitParams& orbit) {
  const double delta = deviation_angle(p_raw, orbit);
  const double bound = max_deviation_angle(orbit);
  return circle_point(std::clamp(delta, -bound, bound), orbit);
}

/**
 * @brief Settings for the distributed planning loop.
 *
 * The step sequence s(k) = base_step/(k+1) is square-summable but not
 * summable. An agent exits after `max_stall` consecutive rounds in which
 * either its gradient norm or its projected step falls below
 * `exit_tolerance`; `max_rounds` caps the whole loop.
 */
struct PlannerParams {
  double base_step = 5e-3;
  double exit_tolerance = 1e-5;
  int max_stall = 5;
  int max_rounds = 5000;
  QuadratureParams quad;

  double step_size(int round) const { return base_step / (round + 1); }

  void validate() const {
    if (!(base_step > 0.0)) throw std::invalid_argument("planner: base_step must be > 0");
    if (!(exit_tolerance > 0.0))
      throw std::invalid_argument("planner: exit_tolerance must be > 0");
    if (max_stall < 1) throw std::invalid_argument("planner: max_stall must be >= 1");
    if (max_rounds < 1) throw std::invalid_argument("planner: max_rounds must be >= 1");
    quad.validate();
  }
};

// Mutable per-satellite planning state.
struct AgentState {
  int id = 0;
  Vec2 position = Vec2::Zero();
  bool exited = false;
  int stall_count = 0;
};

// Snapshot one agent broadcasts to its ring neighbors each round.
struct NeighborMessage {
  int sender = -1;
  Vec2 position = Vec2::Zero();
  double half_width = 0.0;
  double peak = 0.0;
  bool exited = false;
};

namespace detail {

// Gradient computed purely from an agent's own data and the two neighbor
// messages; initial angles come from the static ring roster.
inline Vec2 message_gradient(const SatelliteSpec& self, const Vec2& p_self,
                             const std::vector<SatelliteSpec>& roster,
                             const NeighborMessage& from_prev,
                             const NeighborMessage& from_next,
                             const OrbitParams& orbit) {
  auto roster_angle = [&](int id) {
    for (const auto& s : roster)
      if (s.id == id) return s.initial_angle;
    throw std::runtime_error("planning: message from unknown satellite " +
                             std::to_string(id));
  };
  std::vector<CoverageProfile> local;
  const CoverageProfile own{self.initial_angle + deviation_angle(p_self, orbit),
                            self.half_width, self.peak};
  local.push_back(own);
  int folded = -1;  // two-satellite rings deliver the same neighbor twice
  for (const NeighborMessage* msg : {&from_prev, &from_next}) {
    if (msg->sender == self.id || msg->sender == folded) continue;
    local.push_back(CoverageProfile{
        roster_angle(msg->sender) + deviation_angle(msg->position, orbit),
        msg->half_width, msg->peak});
    folded = msg->sender;
  }
  const auto [fwd, bwd] = half_footprint_integrals(local, own);
  return self.slope() * (fwd - bwd) * angle_gradient(p_self, orbit);
}

}  // namespace detail

/**
 * @brief One synchronous planning round.
 *
 * `agents` and `roster` are parallel and in ring order; `inbox[i]` holds the
 * round-k messages from i's trailing and leading neighbors. Non-exited agents
 * take a projected gradient step and update their stall counters; exited
 * agents only rebroadcast. Returns the round-(k+1) broadcast.
 */
inline std::vector<NeighborMessage> dpgd_round(
    std::vector<AgentState>& agents, const std::vector<SatelliteSpec>& roster,
    const std::vector<std::pair<NeighborMessage, NeighborMessage>>& inbox, int round,
    const PlannerParams& params, const OrbitParams& orbit) {
  if (agents.size() != roster.size() || agents.size() != inbox.size())
    throw std::invalid_argument("planning round: mismatched agent/roster/inbox sizes");

  for (std::size_t i = 0; i < agents.size(); ++i) {
    AgentState& a = agents[i];
    if (a.exited) continue;
    const auto& [from_prev, from_next] = inbox[i];
    if (from_prev.sender < 0 || from_next.sender < 0)
      throw std::runtime_error("planning round " + std::to_string(round) +
                               ": satellite " + std::to_string(a.id) +
                               " is missing a neighbor message");

    const Vec2 grad =
        detail::message_gradient(roster[i], a.position, roster, from_prev, from_next, orbit);
    if (grad.norm() < params.exit_tolerance) {
      ++a.stall_count;
    } else {
      const Vec2 stepped = a.position - params.step_size(round) * grad;
      const Vec2 projected = project_feasible(stepped, orbit);
      if ((projected - a.position).norm() < params.exit_tolerance) {
        ++a.stall_count;
      } else {
        a.stall_count = 0;
        a.position = projected;
      }
    }
    if (a.stall_count >= params.max_stall) a.exited = true;
  }

  std::vector<NeighborMessage> outbox(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i)
    outbox[i] = NeighborMessage{agents[i].id, agents[i].position,
                                roster[i].half_width, roster[i].peak,
                                agents[i].exited};
  return outbox;
}

/// Per-satellite first-order classification in an optimality report.
enum class Stationarity { interior_stationary, boundary, non_stationary };

inline const char* to_string(Stationarity s) {
  switch (s) {
    case Stationarity::interior_stationary: return "interior-stationary";
    case Stationarity::boundary: return "boundary";
    default: return "non-stationary";
  }
}

struct SatelliteCertificate {
  int id = 0;
  Stationarity classification = Stationarity::non_stationary;
  // Interior: normalized front/back imbalance. At the displacement bound:
  // only the inward-pointing part of the imbalance, since the bound itself
  // holds the satellite against the outward part.
  double residual = 0.0;
  double gradient_norm = 0.0;
  double inward_derivative = 0.0;  // cost slope toward the interior (boundary only)
};

// Certificate for one adjacent pair: the signed footprint overlap, the
// spacing margin, and whether the corresponding 4x4 curvature block is PSD.
struct PairCertificate {
  int id_a = 0;
  int id_b = 0;
  double overlap = 0.0;  // alpha_a + alpha_b minus the forward gap
  double margin = 0.0;   // sqrt(alpha_a*alpha_b) minus the positive overlap
  double min_eigenvalue = 0.0;
  bool psd = false;
};

struct OptimalityReport {
  std::vector<SatelliteCertificate> satellites;
  std::vector<PairCertificate> pairs;
  bool all_stationary = false;  // every satellite interior-stationary or boundary
  bool curvature_psd = false;   // every pair block PSD (boundary components zeroed)
};

/**
 * @brief Curvature block of one adjacent pair, in the rank-one structure the
 * banded second-derivative analysis produces.
 */
inline Eigen::Matrix4d adjacency_curvature_block(double alpha_a, double alpha_b,
                                                 const Vec2& v_a, const Vec2& v_b,
                                                 double overlap) {
  Eigen::Matrix4d block;
  block.topLeftCorner<2, 2>() = alpha_a * v_a * v_a.transpose();
  block.bottomRightCorner<2, 2>() = alpha_b * v_b * v_b.transpose();
  block.topRightCorner<2, 2>() = -overlap * v_a * v_b.transpose();
  block.bottomLeftCorner<2, 2>() = -overlap * v_b * v_a.transpose();
  return block;
}

/**
 * @brief First- and second-order optimality certificates for a configuration.
 *
 * Satellites are classified interior-stationary (residual below
 * `stationary_tol`), boundary (at the displacement bound with the one-sided
 * residual below `stationary_tol`), or non-stationary. Pair curvature blocks
 * use the positive overlap; components of satellites at the displacement
 * bound are zeroed since only tangential-inward perturbations are feasible
 * there.
 */
inline OptimalityReport optimality_certificate(const Configuration& config,
                                               const OrbitParams& orbit,
                                               double stationary_tol,
                                               double boundary_tol = 1e-9) {
  OptimalityReport report;
  std::vector<std::size_t> ring;
  for (std::size_t i = 0; i < config.size(); ++i)
    if (config.specs[i].alive) ring.push_back(i);
  if (ring.empty()) {
    report.all_stationary = true;
    report.curvature_psd = true;
    return report;
  }

  const double bound = max_deviation_angle(orbit);
  std::vector<bool> on_boundary(ring.size(), false);
  report.all_stationary = true;

  for (std::size_t a = 0; a < ring.size(); ++a) {
    const std::size_t i = ring[a];
    SatelliteCertificate cert;
    cert.id = config.specs[i].id;
    const auto local = detail::adjacent_profiles(i, config, orbit);
    const auto [fwd, bwd] = detail::half_footprint_integrals(local, local[0]);
    const double mass = fwd + bwd;
    const Vec2 grad = potential_gradient(i, config, orbit);
    cert.gradient_norm = grad.norm();

    const double delta = deviation_angle(config.positions[i], orbit);
    if (std::abs(delta) >= bound - boundary_tol) {
      on_boundary[a] = true;
      // Tangent step toward the interior of the feasible arc.
      const Vec2 inward(orbit.orbit_radius * std::sin(delta) * (delta > 0 ? 1.0 : -1.0),
                        orbit.orbit_radius * std::cos(delta) * (delta > 0 ? -1.0 : 1.0));
      cert.inward_derivative = grad.dot(inward.normalized());
      const double signed_imbalance = delta > 0 ? fwd - bwd : bwd - fwd;
      cert.residual = mass > 0.0 ? std::max(0.0, signed_imbalance) / mass : 0.0;
      cert.classification = cert.residual <= stationary_tol
                                ? Stationarity::boundary
                                : Stationarity::non_stationary;
    } else {
      cert.residual = mass > 0.0 ? std::abs(fwd - bwd) / mass : 0.0;
      cert.classification = cert.residual <= stationary_tol
                                ? Stationarity::interior_stationary
                                : Stationarity::non_stationary;
    }
    if (cert.classification == Stationarity::non_stationary)
      report.all_stationary = false;
    report.satellites.push_back(cert);
  }

  report.curvature_psd = true;
  if (ring.size() >= 2) {
    for (std::size_t a = 0; a < ring.size(); ++a) {
      const std::size_t b = (a + 1) % ring.size();
      if (ring.size() == 2 && a == 1) break;  // one pair only
      const std::size_t i = ring[a], j = ring[b];
      const double phi_i = config.epoch_angle(i, orbit);
      const double phi_j = config.epoch_angle(j, orbit);
      const double gap = wrap_two_pi(phi_j - phi_i);
      PairCertificate pair;
      pair.id_a = config.specs[i].id;
      pair.id_b = config.specs[j].id;
      pair.overlap = config.specs[i].half_width + config.specs[j].half_width - gap;
      // Non-overlapping footprints decouple, so only a positive overlap
      // counts against the spacing margin.
      pair.margin = std::sqrt(config.specs[i].half_width * config.specs[j].half_width) -
                    std::max(0.0, pair.overlap);

      const Vec2 v_i = on_boundary[a]
                           ? Vec2(Vec2::Zero())
                           : Vec2(config.specs[i].slope() *
                                  angle_gradient(config.positions[i], orbit));
      const Vec2 v_j = on_boundary[b]
                           ? Vec2(Vec2::Zero())
                           : Vec2(config.specs[j].slope() *
                                  angle_gradient(config.positions[j], orbit));
      const Eigen::Matrix4d block = adjacency_curvature_block(
          config.specs[i].half_width, config.specs[j].half_width, v_i, v_j,
          std::max(0.0, pair.overlap));
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(block);
      pair.min_eigenvalue = es.eigenvalues().minCoeff();
      const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
      pair.psd = pair.min_eigenvalue >= -1e-10 * scale;
      if (!pair.psd) report.curvature_psd = false;
      report.pairs.push_back(pair);
    }
  }
  return report;
}

struct PlanResult {
  Configuration target;  // input specs with planned positions
  bool converged = false;
  int rounds = 0;
  OptimalityReport report;
};

using RoundObserver = std::function<void(int round, const Configuration& current)>;

/**
 * @brief Run the distributed planning loop to a target configuration.
 *
 * Anchored satellites broadcast but never move (they start exited). Dead
 * entries are carried through untouched. If the round cap is hit before all
 * agents exit, the best iterate is returned with `converged = false`.
 */
inline PlanResult plan(const Configuration& config, const OrbitParams& orbit,
                       const PlannerParams& params, const RoundObserver& observer = {}) {
  params.validate();
  config.validate(orbit);

  std::vector<std::size_t> ring;
  for (std::size_t i = 0; i < config.size(); ++i)
    if (config.specs[i].alive) ring.push_back(i);
  if (ring.empty()) throw std::invalid_argument("plan: no alive satellites");

  std::vector<SatelliteSpec> roster;
  std::vector<AgentState> agents;
  for (std::size_t i : ring) {
    roster.push_back(config.specs[i]);
    AgentState a;
    a.id = config.specs[i].id;
    a.position = config.positions[i];
    a.exited = config.specs[i].anchored;
    agents.push_back(a);
  }
  const std::size_t n = agents.size();

  auto broadcast = [&]() {
    std::vector<NeighborMessage> out(n);
    for (std::size_t i = 0; i < n; ++i)
      out[i] = NeighborMessage{agents[i].id, agents[i].position, roster[i].half_width,
                               roster[i].peak, agents[i].exited};
    return out;
  };
  auto current_config = [&]() {
    Configuration c = config;
    for (std::size_t i = 0; i < n; ++i) c.positions[ring[i]] = agents[i].position;
    return c;
  };
  auto all_exited = [&]() {
    return std::all_of(agents.begin(), agents.end(),
                       [](const AgentState& a) { return a.exited; });
  };

  PlanResult result;
  std::vector<NeighborMessage> mailbox = broadcast();
  int round = 0;
  for (; round < params.max_rounds && !all_exited(); ++round) {
    std::vector<std::pair<NeighborMessage, NeighborMessage>> inbox(n);
    for (std::size_t i = 0; i < n; ++i)
      inbox[i] = {mailbox[(i + n - 1) % n], mailbox[(i + 1) % n]};
    mailbox = dpgd_round(agents, roster, inbox, round, params, orbit);
    if (observer) observer(round, current_config());
  }

  result.converged = all_exited();
  result.rounds = round;
  result.target = current_config();
  result.report =
      optimality_certificate(result.target, orbit, 10.0 * params.exit_tolerance);
  return result;
}

}  // namespace covsim
